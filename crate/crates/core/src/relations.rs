//! Feature extraction and classifier plumbing for temporal relation labelling.
//!
//! Two task shapes are supported: an event and a timex in the same sentence
//! ([`Task::C`]) and two events in adjacent sentences ([`Task::E`]). Both use
//! the same feature schema; slots that do not apply to an argument carry the
//! `NONE` sentinel.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{AnnotationRef, Document, RelationInstance, RelationLabel, Span};
use crate::maxent::{self, Instance, MaxEntError, MaxEntModel, TrainingConfig, TrainingReport};
use crate::signals::{associate_signal, identify_signals, SignalLexicon};

pub const FEATURE_SCHEMA_VERSION: &str = "tlink-features-v1";
/// Schema tag for vectors extracted without the signal block.
pub const FEATURE_SCHEMA_VERSION_NO_SIGNALS: &str = "tlink-features-v1-nosignals";
pub const NONE: &str = "NONE";
/// Width of the token-position buckets.
pub const TOKEN_BUCKET: usize = 5;

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("relation `{id}`: {message}")]
    ArgumentKind { id: String, message: String },
    #[error("relation `{id}` references unknown annotation `{arg}`")]
    MissingArgument { id: String, arg: String },
    #[error("document `{document}`: relation `{id}` has no label")]
    Unlabeled { document: String, id: String },
    #[error("model predicted unknown label `{0}`")]
    UnknownPrediction(String),
    #[error(transparent)]
    Model(#[from] MaxEntError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    /// Event and timex in the same sentence.
    C,
    /// Events in consecutive sentences.
    E,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" | "c" => Ok(Task::C),
            "E" | "e" => Ok(Task::E),
            other => Err(format!("unknown task `{other}` (expected C or E)")),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::C => "C",
            Task::E => "E",
        })
    }
}

/// Ordered categorical features with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureVector {
    features: Vec<(String, String)>,
}

impl FeatureVector {
    fn push(&mut self, name: &str, value: impl Into<String>) {
        debug_assert!(self.get(name).is_none(), "duplicate feature {name}");
        self.features.push((name.to_string(), value.into()));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.features.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|(n, _)| n.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.features.iter().map(|(n, v)| (n.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// `name=value` strings, the classifier's view of the vector.
    pub fn active_features(&self) -> Vec<String> {
        self.features.iter().map(|(n, v)| format!("{n}={v}")).collect()
    }
}

/// Which feature blocks to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureOptions {
    pub signals: bool,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self { signals: true }
    }
}

impl FeatureOptions {
    pub fn schema_version(&self) -> &'static str {
        if self.signals {
            FEATURE_SCHEMA_VERSION
        } else {
            FEATURE_SCHEMA_VERSION_NO_SIGNALS
        }
    }
}

fn resolve<'a>(pair: &RelationInstance, document: &'a Document) -> Result<[AnnotationRef<'a>; 2], RelationError> {
    let get = |arg: &String| {
        document.annotation(arg).ok_or_else(|| RelationError::MissingArgument { id: pair.id.clone(), arg: arg.clone() })
    };
    Ok([get(&pair.arg1)?, get(&pair.arg2)?])
}

fn check_kinds(pair: &RelationInstance, args: &[AnnotationRef<'_>; 2], task: Task) -> Result<(), RelationError> {
    let ok = matches!(
        (task, args),
        (Task::C, [AnnotationRef::Event(_), AnnotationRef::Timex(_)])
            | (Task::C, [AnnotationRef::Timex(_), AnnotationRef::Event(_)])
            | (Task::E, [AnnotationRef::Event(_), AnnotationRef::Event(_)])
    );
    if ok {
        Ok(())
    } else {
        let message = match task {
            Task::C => "task C needs one event and one timex",
            Task::E => "task E needs two events",
        };
        Err(RelationError::ArgumentKind { id: pair.id.clone(), message: message.into() })
    }
}

/// Whether `pair` has the argument kinds and sentence layout of `task`.
pub fn fits_task(pair: &RelationInstance, document: &Document, task: Task) -> bool {
    let Ok(args) = resolve(pair, document) else { return false };
    if check_kinds(pair, &args, task).is_err() {
        return false;
    }
    let (s1, s2) = (args[0].span().sentence(), args[1].span().sentence());
    match task {
        Task::C => s1 == s2,
        Task::E => s1.abs_diff(s2) == 1,
    }
}

fn bool_str(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn before(a: &Span, b: &Span) -> bool {
    (a.sentence(), a.start()) < (b.sentence(), b.start())
}

pub fn extract_features(
    pair: &RelationInstance,
    document: &Document,
    lexicon: &SignalLexicon,
    task: Task,
) -> Result<FeatureVector, RelationError> {
    extract_features_with(pair, document, lexicon, task, FeatureOptions::default())
}

pub fn extract_features_with(
    pair: &RelationInstance,
    document: &Document,
    lexicon: &SignalLexicon,
    task: Task,
    options: FeatureOptions,
) -> Result<FeatureVector, RelationError> {
    let args = resolve(pair, document)?;
    check_kinds(pair, &args, task)?;
    let spans = [args[0].span(), args[1].span()];
    let mut fv = FeatureVector::default();

    for (prefix, arg) in ["arg1", "arg2"].iter().zip(&args) {
        match arg {
            AnnotationRef::Event(e) => {
                fv.push(&format!("{prefix}_tense"), e.tense.as_str());
                fv.push(&format!("{prefix}_aspect"), e.aspect.as_str());
                fv.push(&format!("{prefix}_polarity"), e.polarity.as_str());
                fv.push(&format!("{prefix}_modality"), e.modality.as_str());
            }
            AnnotationRef::Timex(_) => {
                for slot in ["tense", "aspect", "polarity", "modality"] {
                    fv.push(&format!("{prefix}_{slot}"), NONE);
                }
            }
        }
    }

    let timex = args.iter().find_map(|a| match a {
        AnnotationRef::Timex(t) => Some(*t),
        AnnotationRef::Event(_) => None,
    });
    fv.push("timex_type", timex.and_then(|t| t.ttype).map_or(NONE, |t| t.as_str()));
    fv.push("timex_value", timex.and_then(|t| t.value.as_deref()).unwrap_or(NONE));

    if options.signals {
        let sentence = &document.sentences[spans[0].sentence()];
        let mentions = identify_signals(sentence, lexicon);
        match associate_signal(&spans[0], &spans[1], sentence, &mentions) {
            Some(m) => {
                fv.push("signal_text", m.phrase.as_str());
                fv.push("signal_hint", m.hint.as_str());
                fv.push("arg1_before_signal", bool_str(before(&spans[0], &m.span)));
                fv.push("signal_before_arg2", bool_str(before(&m.span, &spans[1])));
            }
            None => {
                for name in ["signal_text", "signal_hint", "arg1_before_signal", "signal_before_arg2"] {
                    fv.push(name, NONE);
                }
            }
        }
    }

    match &args {
        [AnnotationRef::Event(a), AnnotationRef::Event(b)] => {
            fv.push("same_tense", bool_str(a.tense == b.tense));
            fv.push("same_aspect", bool_str(a.aspect == b.aspect));
        }
        _ => {
            fv.push("same_tense", NONE);
            fv.push("same_aspect", NONE);
        }
    }
    fv.push("arg1_before_arg2", bool_str(before(&spans[0], &spans[1])));

    for ((prefix, arg), span) in ["arg1", "arg2"].iter().zip(&args).zip(&spans) {
        fv.push(&format!("{prefix}_tokbucket"), (span.start() / TOKEN_BUCKET).to_string());
        fv.push(&format!("{prefix}_text"), document.surface(span).to_lowercase());
        let kind = match arg {
            AnnotationRef::Event(_) => "event",
            AnnotationRef::Timex(_) => "timex",
        };
        fv.push(&format!("{prefix}_kind"), kind);
    }
    Ok(fv)
}

#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub examples: Vec<(FeatureVector, RelationLabel)>,
    /// Instances skipped for not fitting the task shape.
    pub skipped: usize,
}

pub fn build_training_set(
    documents: &[Document],
    task: Task,
    lexicon: &SignalLexicon,
) -> Result<TrainingSet, RelationError> {
    build_training_set_with(documents, task, lexicon, FeatureOptions::default())
}

pub fn build_training_set_with(
    documents: &[Document],
    task: Task,
    lexicon: &SignalLexicon,
    options: FeatureOptions,
) -> Result<TrainingSet, RelationError> {
    let mut set = TrainingSet::default();
    for doc in documents {
        for pair in &doc.relations {
            let label =
                pair.label.ok_or_else(|| RelationError::Unlabeled { document: doc.id.clone(), id: pair.id.clone() })?;
            if !fits_task(pair, doc, task) {
                set.skipped += 1;
                continue;
            }
            set.examples.push((extract_features_with(pair, doc, lexicon, task, options)?, label));
        }
    }
    Ok(set)
}

pub fn train_relation_model(
    set: &TrainingSet,
    config: &TrainingConfig,
    options: FeatureOptions,
) -> Result<(MaxEntModel, TrainingReport), RelationError> {
    let data: Vec<Instance> = set
        .examples
        .iter()
        .map(|(fv, label)| Instance { features: fv.active_features(), label: label.as_str().to_string() })
        .collect();
    Ok(maxent::train_with_report(&data, config, options.schema_version())?)
}

fn options_for(model: &MaxEntModel) -> Result<FeatureOptions, RelationError> {
    match model.schema_version() {
        FEATURE_SCHEMA_VERSION => Ok(FeatureOptions { signals: true }),
        FEATURE_SCHEMA_VERSION_NO_SIGNALS => Ok(FeatureOptions { signals: false }),
        _ => Err(model.check_schema(FEATURE_SCHEMA_VERSION).unwrap_err().into()),
    }
}

pub fn classify(
    pair: &RelationInstance,
    document: &Document,
    task: Task,
    model: &MaxEntModel,
    lexicon: &SignalLexicon,
) -> Result<RelationLabel, RelationError> {
    let options = options_for(model)?;
    let fv = extract_features_with(pair, document, lexicon, task, options)?;
    let label = model.predict(&fv.active_features());
    label.parse().map_err(|_| RelationError::UnknownPrediction(label.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedLabel {
    pub document: String,
    pub instance: String,
    pub label: RelationLabel,
}

/// Labels every unlabeled instance that fits `task`, in document order.
pub fn label_relations(
    documents: &[Document],
    task: Task,
    model: &MaxEntModel,
    lexicon: &SignalLexicon,
) -> Result<Vec<PredictedLabel>, RelationError> {
    options_for(model)?;
    let mut out = Vec::new();
    for doc in documents {
        for pair in doc.relations.iter().filter(|p| p.label.is_none() && fits_task(p, doc, task)) {
            out.push(PredictedLabel {
                document: doc.id.clone(),
                instance: pair.id.clone(),
                label: classify(pair, doc, task, model, lexicon)?,
            });
        }
    }
    Ok(out)
}

/// Writes predicted labels back into their documents.
pub fn apply_labels(documents: &mut [Document], labels: &[PredictedLabel]) {
    for p in labels {
        if let Some(doc) = documents.iter_mut().find(|d| d.id == p.document) {
            if let Some(r) = doc.relations.iter_mut().find(|r| r.id == p.instance) {
                r.label = Some(p.label);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_document;

    fn sample() -> Document {
        parse_document(
            r#"{"id":"d","dct":"1997-06-12",
                "sentences":[["Officials","said","he","left","the","city","throughout","June","12","."],
                             ["Prices","rose","and","shares","fell","."]],
                "events":[
                  {"id":"e1","span":{"s":0,"start":3,"end":4},"tense":"PAST","aspect":"NONE","polarity":"pos","modality":""},
                  {"id":"e2","span":{"s":1,"start":1,"end":2},"tense":"PAST","aspect":"NONE","polarity":"pos","modality":""},
                  {"id":"e3","span":{"s":0,"start":1,"end":2},"tense":"PAST","aspect":"PERFECTIVE","polarity":"neg","modality":"would"}],
                "timexes":[{"id":"t1","span":{"s":0,"start":7,"end":9},"type":"DATE","value":"1997-06-12"}],
                "relations":[
                  {"id":"l1","arg1":"e1","arg2":"t1","label":"overlap"},
                  {"id":"l2","arg1":"e1","arg2":"e2","label":"before"},
                  {"id":"l3","arg1":"t1","arg2":"e3"}]}"#,
        )
        .unwrap()
    }

    fn pair(doc: &Document, id: &str) -> RelationInstance {
        doc.relations.iter().find(|r| r.id == id).unwrap().clone()
    }

    #[test]
    fn event_timex_features() {
        let d = parse_document(
            r#"{"id":"d","dct":"1997-06-12",
                "sentences":[["The","firm","announced","the","deal","on","Friday","June","12","."]],
                "events":[{"id":"e1","span":{"s":0,"start":2,"end":3},"tense":"PAST","aspect":"NONE","polarity":"pos","modality":""}],
                "timexes":[{"id":"t1","span":{"s":0,"start":7,"end":9},"type":"DATE","value":"1997-06-12"}],
                "relations":[{"id":"l1","arg1":"e1","arg2":"t1"}]}"#,
        )
        .unwrap();
        let fv = extract_features(&d.relations[0], &d, &SignalLexicon::builtin(), Task::C).unwrap();
        assert_eq!(fv.get("arg1_tense"), Some("PAST"));
        assert_eq!(fv.get("arg1_polarity"), Some("pos"));
        assert_eq!(fv.get("arg1_modality"), Some(""));
        assert_eq!(fv.get("arg2_tense"), Some(NONE));
        assert_eq!(fv.get("timex_type"), Some("DATE"));
        assert_eq!(fv.get("timex_value"), Some("1997-06-12"));
        assert_eq!(fv.get("signal_text"), Some(NONE));
        assert_eq!(fv.get("arg1_before_arg2"), Some("true"));
        assert_eq!(fv.get("arg1_tokbucket"), Some("0"));
        assert_eq!(fv.get("arg2_tokbucket"), Some("1"));
        assert_eq!(fv.get("arg2_text"), Some("june 12"));
        assert_eq!(fv.get("arg2_kind"), Some("timex"));
    }

    #[test]
    fn signal_features() {
        let d = sample();
        let fv = extract_features(&pair(&d, "l1"), &d, &SignalLexicon::builtin(), Task::C).unwrap();
        assert_eq!(fv.get("signal_text"), Some("throughout"));
        assert_eq!(fv.get("signal_hint"), Some("overlap"));
        assert_eq!(fv.get("arg1_before_signal"), Some("true"));
        assert_eq!(fv.get("signal_before_arg2"), Some("true"));

        let without = extract_features_with(
            &pair(&d, "l1"),
            &d,
            &SignalLexicon::builtin(),
            Task::C,
            FeatureOptions { signals: false },
        )
        .unwrap();
        assert!(without.get("signal_text").is_none());
        assert_eq!(without.len() + 4, fv.len());
    }

    #[test]
    fn event_pair_features() {
        let d = sample();
        let fv = extract_features(&pair(&d, "l2"), &d, &SignalLexicon::builtin(), Task::E).unwrap();
        assert_eq!(fv.get("same_tense"), Some("true"));
        assert_eq!(fv.get("same_aspect"), Some("true"));
        assert_eq!(fv.get("timex_type"), Some(NONE));
        assert_eq!(fv.get("signal_text"), Some(NONE));
        assert_eq!(fv.get("arg1_before_arg2"), Some("true"));
    }

    #[test]
    fn schema_is_fixed() {
        let d = sample();
        let lex = SignalLexicon::builtin();
        let c: Vec<String> =
            extract_features(&pair(&d, "l1"), &d, &lex, Task::C).unwrap().names().map(String::from).collect();
        let e: Vec<String> =
            extract_features(&pair(&d, "l2"), &d, &lex, Task::E).unwrap().names().map(String::from).collect();
        let reversed: Vec<String> =
            extract_features(&pair(&d, "l3"), &d, &lex, Task::C).unwrap().names().map(String::from).collect();
        assert_eq!(c, e);
        assert_eq!(c, reversed);
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let d = sample();
        let lex = SignalLexicon::builtin();
        assert!(matches!(
            extract_features(&pair(&d, "l2"), &d, &lex, Task::C),
            Err(RelationError::ArgumentKind { .. })
        ));
        assert!(extract_features(&pair(&d, "l1"), &d, &lex, Task::E).is_err());
    }

    #[test]
    fn training_set_shapes() {
        let mut d = sample();
        d.relations.retain(|r| r.label.is_some());
        let lex = SignalLexicon::builtin();
        let c = build_training_set(std::slice::from_ref(&d), Task::C, &lex).unwrap();
        assert_eq!((c.examples.len(), c.skipped), (1, 1));
        let e = build_training_set(std::slice::from_ref(&d), Task::E, &lex).unwrap();
        assert_eq!((e.examples.len(), e.skipped), (1, 1));
        assert!(build_training_set(&[], Task::C, &lex).unwrap().examples.is_empty());

        let unlabeled = sample();
        assert!(matches!(build_training_set(&[unlabeled], Task::C, &lex), Err(RelationError::Unlabeled { .. })));
    }

    #[test]
    fn labelling_fills_only_unlabeled_pairs() {
        let d = sample();
        let lex = SignalLexicon::builtin();
        let model = MaxEntModel::zero(vec!["after".into()], FEATURE_SCHEMA_VERSION, 1.0);
        let out = label_relations(std::slice::from_ref(&d), Task::C, &model, &lex).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].instance, "l3");
        assert_eq!(out[0].label, RelationLabel::After);

        let mut docs = vec![d];
        apply_labels(&mut docs, &out);
        assert_eq!(docs[0].relations[2].label, Some(RelationLabel::After));
        assert!(label_relations(&docs, Task::C, &model, &lex).unwrap().is_empty());
    }

    #[test]
    fn schema_mismatch_rejected() {
        let d = sample();
        let model = MaxEntModel::zero(vec!["after".into()], "other-schema", 1.0);
        assert!(matches!(
            label_relations(&[d], Task::C, &model, &SignalLexicon::builtin()),
            Err(RelationError::Model(MaxEntError::SchemaMismatch { .. }))
        ));
    }

    #[test]
    fn task_parse() {
        assert_eq!("C".parse::<Task>().unwrap(), Task::C);
        assert!("Q".parse::<Task>().is_err());
    }
}
