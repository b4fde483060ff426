//! Document model and the canonical JSON format.
//!
//! A document is a list of pre-tokenized sentences anchored to a document
//! creation time (DCT), with optional event, timex and relation layers:
//!
//! ```json
//! {"id": "d1", "dct": "1997-06-12",
//!  "sentences": [["He", "left", "today", "."]],
//!  "events": [{"id": "e1", "span": {"s": 0, "start": 1, "end": 2},
//!              "tense": "PAST", "aspect": "NONE", "polarity": "pos", "modality": ""}],
//!  "timexes": [{"id": "t1", "span": {"s": 0, "start": 2, "end": 3},
//!               "type": "DATE", "value": "PRESENT_REF"}],
//!  "relations": [{"id": "l1", "arg1": "e1", "arg2": "t1", "label": "overlap"}]}
//! ```
//!
//! Unknown keys are rejected. A timex may omit `type` and `value` (a
//! recognized but not yet normalized span) or only `value` (a span whose
//! value could not be anchored).

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{CalendarDate, Granularity};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid date: {0}")]
    InvalidDate(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown annotation id `{0}`")]
    DanglingReference(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Half-open token range `[start, end)` within one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "SpanWire", into = "SpanWire")]
pub struct Span {
    sentence: usize,
    start: usize,
    end: usize,
}

impl Span {
    /// Fails unless `start < end`; bounds against a sentence are checked by
    /// [`Document::check_span`].
    pub fn new(sentence: usize, start: usize, end: usize) -> Result<Self, CorpusError> {
        if start >= end {
            return Err(CorpusError::Validation(format!(
                "empty or reversed span {start}..{end} in sentence {sentence}"
            )));
        }
        Ok(Self { sentence, start, end })
    }

    pub fn sentence(&self) -> usize {
        self.sentence
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when `other` lies within `self` (same sentence).
    pub fn contains(&self, other: &Span) -> bool {
        self.sentence == other.sentence && self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.sentence == other.sentence && self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}..{}", self.sentence, self.start, self.end)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpanWire {
    s: usize,
    start: usize,
    end: usize,
}

impl TryFrom<SpanWire> for Span {
    type Error = String;

    fn try_from(w: SpanWire) -> Result<Self, Self::Error> {
        Span::new(w.s, w.start, w.end).map_err(|e| e.to_string())
    }
}

impl From<Span> for SpanWire {
    fn from(s: Span) -> Self {
        SpanWire { s: s.sentence, start: s.start, end: s.end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimexType {
    #[serde(rename = "DATE")]
    Date,
    #[serde(rename = "DURATION")]
    Duration,
}

impl TimexType {
    pub fn as_str(&self) -> &'static str {
        match self {
            TimexType::Date => "DATE",
            TimexType::Duration => "DURATION",
        }
    }
}

impl fmt::Display for TimexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimexAnnotation {
    pub id: String,
    pub span: Span,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub ttype: Option<TimexType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

fn duration_value_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^P(\d+|X)[YMWD]$").unwrap())
}

fn date_value_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\d{4}(-\d{2}(-\d{2})?)?|\d{4}-W\d{2}|PRESENT_REF)$").unwrap())
}

/// Whether `value` is well-formed for a timex of type `ttype`.
pub fn is_valid_timex_value(ttype: TimexType, value: &str) -> bool {
    match ttype {
        TimexType::Duration => duration_value_re().is_match(value),
        TimexType::Date => {
            if !date_value_re().is_match(value) {
                return false;
            }
            // Calendar forms must name a real date.
            value == "PRESENT_REF" || value.contains("-W") || value.parse::<CalendarDate>().is_ok()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Polarity::Pos => "pos",
            Polarity::Neg => "neg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventAnnotation {
    pub id: String,
    pub span: Span,
    pub tense: String,
    pub aspect: String,
    pub polarity: Polarity,
    pub modality: String,
}

/// Temporal relation labels; lower-case on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RelationLabel {
    Before,
    After,
    Overlap,
    BeforeOrOverlap,
    OverlapOrAfter,
    Vague,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 6] = [
        RelationLabel::Before,
        RelationLabel::After,
        RelationLabel::Overlap,
        RelationLabel::BeforeOrOverlap,
        RelationLabel::OverlapOrAfter,
        RelationLabel::Vague,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationLabel::Before => "before",
            RelationLabel::After => "after",
            RelationLabel::Overlap => "overlap",
            RelationLabel::BeforeOrOverlap => "before-or-overlap",
            RelationLabel::OverlapOrAfter => "overlap-or-after",
            RelationLabel::Vague => "vague",
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown relation label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for RelationLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationLabel::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl TryFrom<String> for RelationLabel {
    type Error = UnknownLabel;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RelationLabel> for String {
    fn from(l: RelationLabel) -> Self {
        l.as_str().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationInstance {
    pub id: String,
    pub arg1: String,
    pub arg2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<RelationLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Either kind of annotation a relation argument may name.
#[derive(Debug, Clone, Copy)]
pub enum AnnotationRef<'a> {
    Event(&'a EventAnnotation),
    Timex(&'a TimexAnnotation),
}

impl AnnotationRef<'_> {
    pub fn span(&self) -> Span {
        match self {
            AnnotationRef::Event(e) => e.span,
            AnnotationRef::Timex(t) => t.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub dct: CalendarDate,
    pub sentences: Vec<Sentence>,
    pub events: Vec<EventAnnotation>,
    pub timexes: Vec<TimexAnnotation>,
    pub relations: Vec<RelationInstance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentWire {
    id: String,
    dct: String,
    sentences: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    events: Vec<EventAnnotation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    timexes: Vec<TimexAnnotation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    relations: Vec<RelationInstance>,
}

impl Document {
    /// A document without annotation layers.
    pub fn new(id: impl Into<String>, dct: CalendarDate, sentences: Vec<Vec<String>>) -> Result<Self, CorpusError> {
        let doc = Document {
            id: id.into(),
            dct,
            sentences: sentences.into_iter().enumerate().map(|(index, tokens)| Sentence { index, tokens }).collect(),
            events: Vec::new(),
            timexes: Vec::new(),
            relations: Vec::new(),
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn check_span(&self, span: &Span) -> Result<(), CorpusError> {
        let sentence = self
            .sentences
            .get(span.sentence)
            .ok_or_else(|| CorpusError::Validation(format!("span {span} names a missing sentence")))?;
        if span.end > sentence.len() {
            return Err(CorpusError::Validation(format!(
                "span {span} runs past the end of sentence {} ({} tokens)",
                span.sentence,
                sentence.len()
            )));
        }
        Ok(())
    }

    /// Checks every document invariant: DCT granularity, dense non-empty
    /// sentences, in-bounds spans, unique ids, resolvable relation
    /// arguments and well-formed timex values.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.dct.granularity() != Granularity::Day {
            return Err(CorpusError::InvalidDate(format!("dct `{}` must be YYYY-MM-DD", self.dct)));
        }
        for (i, sentence) in self.sentences.iter().enumerate() {
            if sentence.index != i {
                return Err(CorpusError::Validation(format!("sentence at position {i} has index {}", sentence.index)));
            }
            if sentence.tokens.is_empty() {
                return Err(CorpusError::Validation(format!("sentence {i} has no tokens")));
            }
            for (j, tok) in sentence.tokens.iter().enumerate() {
                if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                    return Err(CorpusError::Validation(format!(
                        "token {j} of sentence {i} is empty or contains whitespace: {tok:?}"
                    )));
                }
            }
        }

        let mut ids = HashSet::new();
        for e in &self.events {
            self.check_span(&e.span)?;
            if !ids.insert(e.id.as_str()) {
                return Err(CorpusError::Validation(format!("duplicate annotation id `{}`", e.id)));
            }
        }
        for t in &self.timexes {
            self.check_span(&t.span)?;
            if !ids.insert(t.id.as_str()) {
                return Err(CorpusError::Validation(format!("duplicate annotation id `{}`", t.id)));
            }
            match (&t.ttype, &t.value) {
                (None, Some(_)) => {
                    return Err(CorpusError::Validation(format!("timex `{}` has a value but no type", t.id)))
                }
                (Some(ty), Some(v)) if !is_valid_timex_value(*ty, v) => {
                    return Err(CorpusError::Validation(format!("timex `{}` has malformed {ty} value `{v}`", t.id)))
                }
                _ => {}
            }
        }

        let mut rel_ids = HashSet::new();
        for r in &self.relations {
            if !rel_ids.insert(r.id.as_str()) || ids.contains(r.id.as_str()) {
                return Err(CorpusError::Validation(format!("duplicate relation id `{}`", r.id)));
            }
            for arg in [&r.arg1, &r.arg2] {
                if !ids.contains(arg.as_str()) {
                    return Err(CorpusError::DanglingReference(arg.clone()));
                }
            }
            if r.arg1 == r.arg2 {
                return Err(CorpusError::Validation(format!("relation `{}` links `{}` to itself", r.id, r.arg1)));
            }
        }
        Ok(())
    }

    pub fn tokens(&self, span: &Span) -> &[String] {
        &self.sentences[span.sentence].tokens[span.start..span.end]
    }

    /// Space-joined surface string of `span`.
    pub fn surface(&self, span: &Span) -> String {
        self.tokens(span).join(" ")
    }

    pub fn event(&self, id: &str) -> Option<&EventAnnotation> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn timex(&self, id: &str) -> Option<&TimexAnnotation> {
        self.timexes.iter().find(|t| t.id == id)
    }

    pub fn annotation(&self, id: &str) -> Option<AnnotationRef<'_>> {
        self.event(id).map(AnnotationRef::Event).or_else(|| self.timex(id).map(AnnotationRef::Timex))
    }

    fn to_wire(&self) -> DocumentWire {
        DocumentWire {
            id: self.id.clone(),
            dct: self.dct.to_string(),
            sentences: self.sentences.iter().map(|s| s.tokens.clone()).collect(),
            events: self.events.clone(),
            timexes: self.timexes.clone(),
            relations: self.relations.clone(),
        }
    }

    fn from_wire(w: DocumentWire) -> Result<Self, CorpusError> {
        let dct: CalendarDate = w.dct.parse().map_err(|_| CorpusError::InvalidDate(w.dct.clone()))?;
        let doc = Document {
            id: w.id,
            dct,
            sentences: w.sentences.into_iter().enumerate().map(|(index, tokens)| Sentence { index, tokens }).collect(),
            events: w.events,
            timexes: w.timexes,
            relations: w.relations,
        };
        doc.validate()?;
        Ok(doc)
    }
}

/// Parses and validates one canonical JSON document.
pub fn parse_document(input: &str) -> Result<Document, CorpusError> {
    let wire: DocumentWire = serde_json::from_str(input).map_err(|e| CorpusError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Document::from_wire(wire)
}

pub fn read_document<R: Read>(mut reader: R) -> Result<Document, CorpusError> {
    let mut buf = String::new();
    reader.read_to_string(&mut buf)?;
    parse_document(&buf)
}

/// Canonical pretty-printed JSON, newline-terminated. Empty annotation
/// layers are omitted.
pub fn serialize(document: &Document) -> String {
    let mut out = serde_json::to_string_pretty(&document.to_wire()).expect("document serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"id":"d1","dct":"1997-06-12","sentences":[["Hello","."]]}"#;

    #[test]
    fn minimal_document() {
        let d = parse_document(MINIMAL).unwrap();
        assert_eq!(d.sentences.len(), 1);
        assert_eq!(d.sentences[0].tokens.len(), 2);
        assert!(d.events.is_empty() && d.timexes.is_empty() && d.relations.is_empty());
    }

    #[test]
    fn single_event() {
        let d = parse_document(
            r#"{"id":"d1","dct":"1997-06-12","sentences":[["Hello","."]],
               "events":[{"id":"e1","span":{"s":0,"start":0,"end":1},"tense":"NONE","aspect":"NONE","polarity":"pos","modality":""}]}"#,
        )
        .unwrap();
        assert_eq!(d.events.len(), 1);
        assert_eq!(d.events[0].span, Span::new(0, 0, 1).unwrap());
    }

    #[test]
    fn impossible_dct() {
        let err = parse_document(r#"{"id":"d1","dct":"1997-02-30","sentences":[["x"]]}"#).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidDate(_)), "{err}");
        let err = parse_document(r#"{"id":"d1","dct":"1997-02","sentences":[["x"]]}"#).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidDate(_)), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_document("{\"id\":\"d1\",\n\"dct\": }").unwrap_err();
        match err {
            CorpusError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_document(r#"{"id":"d1","dct":"1997-06-12","sentences":[["x"]],"extra":1}"#).unwrap_err();
        assert!(matches!(err, CorpusError::Syntax { .. }));
        let err = parse_document(
            r#"{"id":"d1","dct":"1997-06-12","sentences":[["x"]],
               "timexes":[{"id":"t1","span":{"s":0,"start":0,"end":1,"x":2}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Syntax { .. }));
    }

    #[test]
    fn dangling_relation_names_id() {
        let err = parse_document(
            r#"{"id":"d1","dct":"1997-06-12","sentences":[["a","b"]],
               "events":[{"id":"e1","span":{"s":0,"start":0,"end":1},"tense":"","aspect":"","polarity":"neg","modality":""}],
               "relations":[{"id":"l1","arg1":"e1","arg2":"t9"}]}"#,
        )
        .unwrap_err();
        match err {
            CorpusError::DanglingReference(id) => assert_eq!(id, "t9"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn span_bounds_checked() {
        let err = parse_document(
            r#"{"id":"d1","dct":"1997-06-12","sentences":[["a","b"]],
               "timexes":[{"id":"t1","span":{"s":0,"start":1,"end":3}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Validation(_)));
        let err = parse_document(
            r#"{"id":"d1","dct":"1997-06-12","sentences":[["a","b"]],
               "timexes":[{"id":"t1","span":{"s":0,"start":1,"end":1}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Syntax { .. }));
    }

    #[test]
    fn timex_values_checked() {
        assert!(is_valid_timex_value(TimexType::Duration, "P7Y"));
        assert!(is_valid_timex_value(TimexType::Duration, "PXW"));
        assert!(!is_valid_timex_value(TimexType::Duration, "P7H"));
        assert!(is_valid_timex_value(TimexType::Date, "PRESENT_REF"));
        assert!(is_valid_timex_value(TimexType::Date, "1997-W24"));
        assert!(is_valid_timex_value(TimexType::Date, "1996-12"));
        assert!(!is_valid_timex_value(TimexType::Date, "1996-13"));
        assert!(!is_valid_timex_value(TimexType::Date, "P1D"));
    }

    #[test]
    fn labels_round_trip() {
        for l in RelationLabel::ALL {
            assert_eq!(l.as_str().parse::<RelationLabel>().unwrap(), l);
            assert_eq!(l.as_str(), l.as_str().to_lowercase());
        }
        assert!("BEFORE".parse::<RelationLabel>().is_err());
    }

    #[test]
    fn round_trip_minimal_and_duration_value() {
        let d = parse_document(MINIMAL).unwrap();
        assert_eq!(parse_document(&serialize(&d)).unwrap(), d);

        let d = parse_document(
            r#"{"id":"d2","dct":"1997-06-12","sentences":[["for","seven","years"]],
               "timexes":[{"id":"t1","span":{"s":0,"start":1,"end":3},"type":"DURATION","value":"P7Y"}]}"#,
        )
        .unwrap();
        let text = serialize(&d);
        assert!(text.contains("\"value\": \"P7Y\""));
        assert_eq!(parse_document(&text).unwrap(), d);
    }
}
