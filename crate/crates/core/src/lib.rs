//! Temporal expression tagging and temporal relation labelling.
//!
//! The pipeline has two halves:
//!
//! * **Timexes.** [`recognizer`] finds maximal n-gram matches against a regex
//!   ruleset, and [`normalizer`] types each match as DATE or DURATION and
//!   anchors its value against the document creation time.
//! * **Relations.** [`signals`] finds signal phrases (`before`, `soon after`,
//!   ...) and attaches the nearest same-clause one to each entity pair,
//!   [`relations`] turns pairs into categorical feature vectors, and
//!   [`maxent`] trains and applies a maximum-entropy classifier over them.
//!
//! [`corpus`] holds the document model and JSON format, [`eval`] scores
//! output against gold annotations, and [`cli`] wires it all together.

pub mod calendar;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod maxent;
pub mod normalizer;
pub mod numbers;
pub mod recognizer;
pub mod relations;
pub mod signals;

pub use corpus::{Document, RelationLabel, Span, TimexType};
