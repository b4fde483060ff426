//! Scoring against gold annotations.
//!
//! Extents are matched strictly: a predicted span counts only when its
//! sentence, start and end all equal a gold span's. Attribute accuracy is
//! measured over the strictly matched timexes and is all-or-nothing, so a
//! value of `1990-05` earns nothing against a gold `1990-05-14`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::corpus::{Document, RelationLabel, Span, TimexAnnotation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtentScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub r#fn: usize,
}

impl ExtentScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { precision, recall, f1, tp, fp, r#fn: fn_ }
    }
}

/// Strict span matching; duplicate spans within a list count once.
pub fn score_extents(gold: &[Span], pred: &[Span]) -> ExtentScore {
    let gold: HashSet<&Span> = gold.iter().collect();
    let pred: HashSet<&Span> = pred.iter().collect();
    let tp = pred.intersection(&gold).count();
    ExtentScore::from_counts(tp, pred.len() - tp, gold.len() - tp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimexAttribute {
    Type,
    Value,
}

/// Accuracy with an explicit empty-denominator case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    /// `None` when nothing was scored.
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }

    pub fn merge(self, other: Accuracy) -> Accuracy {
        Accuracy { correct: self.correct + other.correct, total: self.total + other.total }
    }
}

impl fmt::Display for Accuracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v:.4}"),
            None => f.write_str("n/a"),
        }
    }
}

/// Attribute accuracy over timexes whose extents match exactly. A missing
/// predicted attribute counts as wrong.
pub fn score_attribute(gold: &[TimexAnnotation], pred: &[TimexAnnotation], attr: TimexAttribute) -> Accuracy {
    let by_span: HashMap<Span, &TimexAnnotation> = pred.iter().map(|t| (t.span, t)).collect();
    let mut acc = Accuracy { correct: 0, total: 0 };
    let mut seen = HashSet::new();
    for g in gold {
        if !seen.insert(g.span) {
            continue;
        }
        let Some(p) = by_span.get(&g.span) else { continue };
        acc.total += 1;
        let right = match attr {
            TimexAttribute::Type => p.ttype.is_some() && p.ttype == g.ttype,
            TimexAttribute::Value => p.value.is_some() && p.value == g.value,
        };
        if right {
            acc.correct += 1;
        }
    }
    acc
}

/// Fraction of gold-labelled instances whose predicted label agrees; ids
/// missing from the prediction count as wrong.
pub fn score_relations(gold: &[(String, RelationLabel)], pred: &[(String, RelationLabel)]) -> Accuracy {
    let pred: HashMap<&str, RelationLabel> = pred.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    let correct = gold.iter().filter(|(id, l)| pred.get(id.as_str()) == Some(l)).count();
    Accuracy { correct, total: gold.len() }
}

/// Corpus-level report comparing predicted documents with gold ones,
/// matched by document id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub documents: usize,
    pub extent: ExtentScore,
    pub timex_type: Accuracy,
    pub timex_value: Accuracy,
    pub relations: Accuracy,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    documents: usize,
    extent: &'a ExtentScore,
    type_accuracy: Option<f64>,
    value_accuracy: Option<f64>,
    relation_accuracy: Option<f64>,
    counts: Counts,
}

#[derive(Serialize)]
struct Counts {
    type_correct: usize,
    value_correct: usize,
    matched_timexes: usize,
    relations_correct: usize,
    relations_scored: usize,
}

impl Report {
    /// Documents in `gold` without a counterpart in `pred` are scored
    /// against an empty prediction.
    pub fn compare(gold: &[Document], pred: &[Document]) -> Report {
        let pred_by_id: HashMap<&str, &Document> = pred.iter().map(|d| (d.id.as_str(), d)).collect();
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        let zero = Accuracy { correct: 0, total: 0 };
        let (mut ty, mut val, mut rel) = (zero, zero, zero);
        for g in gold {
            let p = pred_by_id.get(g.id.as_str());
            let gold_spans: Vec<Span> = g.timexes.iter().map(|t| t.span).collect();
            let pred_timexes: &[TimexAnnotation] = p.map_or(&[], |d| &d.timexes);
            let pred_spans: Vec<Span> = pred_timexes.iter().map(|t| t.span).collect();
            let ext = score_extents(&gold_spans, &pred_spans);
            tp += ext.tp;
            fp += ext.fp;
            fn_ += ext.r#fn;
            ty = ty.merge(score_attribute(&g.timexes, pred_timexes, TimexAttribute::Type));
            val = val.merge(score_attribute(&g.timexes, pred_timexes, TimexAttribute::Value));

            let gold_rel: Vec<(String, RelationLabel)> =
                g.relations.iter().filter_map(|r| r.label.map(|l| (r.id.clone(), l))).collect();
            let pred_rel: Vec<(String, RelationLabel)> = p
                .map(|d| d.relations.iter().filter_map(|r| r.label.map(|l| (r.id.clone(), l))).collect())
                .unwrap_or_default();
            rel = rel.merge(score_relations(&gold_rel, &pred_rel));
        }
        Report {
            documents: gold.len(),
            extent: ExtentScore::from_counts(tp, fp, fn_),
            timex_type: ty,
            timex_value: val,
            relations: rel,
        }
    }

    pub fn to_json(&self) -> String {
        let json = ReportJson {
            documents: self.documents,
            extent: &self.extent,
            type_accuracy: self.timex_type.value(),
            value_accuracy: self.timex_value.value(),
            relation_accuracy: self.relations.value(),
            counts: Counts {
                type_correct: self.timex_type.correct,
                value_correct: self.timex_value.correct,
                matched_timexes: self.timex_type.total,
                relations_correct: self.relations.correct,
                relations_scored: self.relations.total,
            },
        };
        let mut out = serde_json::to_string_pretty(&json).expect("report serializes");
        out.push('\n');
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.extent;
        writeln!(f, "documents           {}", self.documents)?;
        writeln!(f, "extent precision    {:.4}  (tp {} fp {})", e.precision, e.tp, e.fp)?;
        writeln!(f, "extent recall       {:.4}  (fn {})", e.recall, e.r#fn)?;
        writeln!(f, "extent f1           {:.4}", e.f1)?;
        writeln!(
            f,
            "type accuracy       {}  ({}/{})",
            self.timex_type, self.timex_type.correct, self.timex_type.total
        )?;
        writeln!(
            f,
            "value accuracy      {}  ({}/{})",
            self.timex_value, self.timex_value.correct, self.timex_value.total
        )?;
        writeln!(f, "relation accuracy   {}  ({}/{})", self.relations, self.relations.correct, self.relations.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TimexType;

    fn sp(s: usize, a: usize, b: usize) -> Span {
        Span::new(s, a, b).unwrap()
    }

    fn tx(span: Span, value: Option<&str>) -> TimexAnnotation {
        TimexAnnotation { id: "t".into(), span, ttype: Some(TimexType::Date), value: value.map(String::from) }
    }

    #[test]
    fn identity() {
        let g = vec![sp(0, 0, 1), sp(1, 2, 4)];
        let s = score_extents(&g, &g);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_prediction() {
        let s = score_extents(&[sp(0, 0, 1)], &[]);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 0.0, 0.0));
        let s = score_extents(&[], &[]);
        assert_eq!((s.precision, s.recall), (1.0, 1.0));
    }

    #[test]
    fn partial_overlap_gets_no_credit() {
        let gold = vec![sp(0, 0, 2), sp(0, 5, 6)];
        let pred = vec![sp(0, 0, 2), sp(0, 4, 6)];
        let s = score_extents(&gold, &pred);
        assert_eq!((s.tp, s.fp, s.r#fn), (1, 1, 1));
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn value_is_all_or_nothing() {
        let g = vec![tx(sp(0, 0, 1), Some("1990-05-14"))];
        let p = vec![tx(sp(0, 0, 1), Some("1990-05"))];
        let acc = score_attribute(&g, &p, TimexAttribute::Value);
        assert_eq!(acc.value(), Some(0.0));
        assert_eq!(score_attribute(&g, &g, TimexAttribute::Value).value(), Some(1.0));
        let missing = vec![tx(sp(0, 0, 1), None)];
        assert_eq!(score_attribute(&g, &missing, TimexAttribute::Value).value(), Some(0.0));
        let elsewhere = vec![tx(sp(0, 1, 2), Some("1990-05-14"))];
        let acc = score_attribute(&g, &elsewhere, TimexAttribute::Value);
        assert_eq!(acc.value(), None);
        assert_eq!(acc.to_string(), "n/a");
    }

    #[test]
    fn relation_accuracy() {
        use RelationLabel::*;
        let g: Vec<(String, RelationLabel)> =
            vec![("a".into(), Before), ("b".into(), After), ("c".into(), Overlap), ("d".into(), Vague)];
        assert_eq!(score_relations(&g, &g).value(), Some(1.0));
        let mut half = g.clone();
        half[0].1 = After;
        half[1].1 = Before;
        assert_eq!(score_relations(&g, &half).value(), Some(0.5));
        assert_eq!(score_relations(&g, &g[1..]).value(), Some(0.75));
    }
}
