//! Timex extent recognition by n-gram matching against a regex ruleset.
//!
//! Every token window of up to `max_n` tokens is joined with single spaces
//! and tested against the ruleset; a window matches when some rule matches
//! the whole string, case-insensitively. Matches nested inside a larger
//! match are dropped, and partially overlapping matches are resolved in
//! favour of the longer one (the leftmost on a tie).

use std::collections::HashSet;

use regex::{Regex, RegexSet, RegexSetBuilder};
use thiserror::Error;

use crate::corpus::{Document, Sentence, Span};

/// Rules whose name starts with this prefix force their matches to DATE.
pub const FORCE_DATE_PREFIX: &str = "date:";

const DEFAULT_RULES: &str = include_str!("../data/rules.tsv");

#[derive(Debug, Error)]
pub enum RulesetError {
    #[error("line {line}: expected `name<TAB>pattern`")]
    Format { line: usize },
    #[error("line {line}: pattern for rule `{name}` does not compile: {source}")]
    Compile {
        line: usize,
        name: String,
        #[source]
        source: regex::Error,
    },
    #[error("line {line}: duplicate rule name `{name}`")]
    DuplicateName { line: usize, name: String },
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub name: String,
    pub pattern: String,
}

impl Rule {
    pub fn forces_date(&self) -> bool {
        self.name.starts_with(FORCE_DATE_PREFIX)
    }
}

#[derive(Debug, Clone)]
pub struct Ruleset {
    rules: Vec<Rule>,
    set: RegexSet,
}

fn anchored(pattern: &str) -> String {
    format!("^(?:{pattern})$")
}

impl Ruleset {
    pub fn new(rules: Vec<Rule>) -> Result<Self, RulesetError> {
        let set = RegexSetBuilder::new(rules.iter().map(|r| anchored(&r.pattern)))
            .case_insensitive(true)
            .build()
            .map_err(|source| RulesetError::Compile { line: 0, name: String::new(), source })?;
        Ok(Self { rules, set })
    }

    /// The ruleset shipped with the crate.
    pub fn builtin() -> Self {
        load_ruleset(DEFAULT_RULES).expect("builtin ruleset is valid")
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn is_match(&self, surface: &str) -> bool {
        self.set.is_match(surface)
    }

    /// First rule, in file order, that matches all of `surface`.
    pub fn first_match(&self, surface: &str) -> Option<&Rule> {
        self.set.matches(surface).iter().next().map(|i| &self.rules[i])
    }

    pub fn forces_date(&self, surface: &str) -> bool {
        self.first_match(surface).is_some_and(Rule::forces_date)
    }
}

/// Parses `name<TAB>pattern` lines. Blank lines and lines starting with `#`
/// are skipped.
pub fn load_ruleset(input: &str) -> Result<Ruleset, RulesetError> {
    let mut rules = Vec::new();
    let mut names = HashSet::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let (name, pattern) = raw.split_once('\t').ok_or(RulesetError::Format { line })?;
        let name = name.trim();
        if name.is_empty() || pattern.is_empty() {
            return Err(RulesetError::Format { line });
        }
        Regex::new(&anchored(pattern)).map_err(|source| RulesetError::Compile {
            line,
            name: name.to_string(),
            source,
        })?;
        if !names.insert(name.to_string()) {
            return Err(RulesetError::DuplicateName { line, name: name.to_string() });
        }
        rules.push(Rule { name: name.to_string(), pattern: pattern.to_string() });
    }
    Ruleset::new(rules)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecognizerConfig {
    pub max_n: usize,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        Self { max_n: 5 }
    }
}

/// All windows of 1..=`max_n` tokens with their surface strings, ordered by
/// start then length.
pub fn candidate_spans(sentence: &Sentence, config: &RecognizerConfig) -> Vec<(Span, String)> {
    let n = sentence.len();
    let mut out = Vec::new();
    for start in 0..n {
        for len in 1..=config.max_n.min(n - start) {
            let span = Span::new(sentence.index, start, start + len).expect("non-empty window");
            out.push((span, sentence.tokens[start..start + len].join(" ")));
        }
    }
    out
}

/// Keeps the maximal windows among `windows` (half-open `(start, end)`
/// pairs, duplicates allowed): drops every window nested in another, then
/// resolves partial overlaps longest-first, leftmost on ties. The result is
/// sorted by start.
pub(crate) fn select_maximal(windows: &[(usize, usize)]) -> Vec<(usize, usize)> {
    if windows.is_empty() {
        return Vec::new();
    }
    let width = windows.iter().map(|w| w.1).max().unwrap_or(0) + 1;
    // Furthest end reached by a window starting at each position.
    let mut reach: Vec<Option<usize>> = vec![None; width];
    for &(s, e) in windows {
        reach[s] = Some(reach[s].map_or(e, |r: usize| r.max(e)));
    }
    let mut unnested: Vec<(usize, usize)> = Vec::new();
    let mut prefix_max: Option<usize> = None;
    let mut seen = HashSet::new();
    let mut by_start: Vec<(usize, usize)> = windows.to_vec();
    by_start.sort_unstable();
    let mut i = 0;
    while i < by_start.len() {
        let s = by_start[i].0;
        let here = reach[s].expect("start has a window");
        while i < by_start.len() && by_start[i].0 == s {
            let e = by_start[i].1;
            // Nested iff an earlier start reaches at least as far, or the
            // same start reaches further.
            let nested = prefix_max.is_some_and(|m| m >= e) || here > e;
            if !nested && seen.insert((s, e)) {
                unnested.push((s, e));
            }
            i += 1;
        }
        prefix_max = Some(prefix_max.map_or(here, |m| m.max(here)));
    }

    unnested.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for w in unnested {
        if chosen.iter().all(|c| w.1 <= c.0 || c.1 <= w.0) {
            chosen.push(w);
        }
    }
    chosen.sort_unstable();
    chosen
}

pub fn recognize_sentence(sentence: &Sentence, ruleset: &Ruleset, config: &RecognizerConfig) -> Vec<Span> {
    let n = sentence.len();
    let mut matches = Vec::new();
    for start in 0..n {
        for len in 1..=config.max_n.min(n - start) {
            let surface = sentence.tokens[start..start + len].join(" ");
            if ruleset.is_match(&surface) {
                matches.push((start, start + len));
            }
        }
    }
    select_maximal(&matches)
        .into_iter()
        .map(|(s, e)| Span::new(sentence.index, s, e).expect("non-empty window"))
        .collect()
}

/// Maximal timex spans across the document, in document order.
pub fn recognize(document: &Document, ruleset: &Ruleset, config: &RecognizerConfig) -> Vec<Span> {
    document.sentences.iter().flat_map(|s| recognize_sentence(s, ruleset, config)).collect()
}
