//! Temporal signal phrases and their association with entity pairs.
//!
//! A signal is a closed-class phrase such as `before` or `soon after`. The
//! lexicon maps each phrase to the relation it suggests between the thing on
//! its left and the thing on its right; that hint is passed on as-is, and
//! deciding whether word order inverts it is left to the classifier.

use std::collections::HashMap;

use thiserror::Error;

use crate::corpus::{RelationLabel, Sentence, Span};
use crate::recognizer::select_maximal;

const DEFAULT_LEXICON: &str = include_str!("../data/signals.tsv");

/// Tokens that split a sentence into clause segments.
pub const CLAUSE_DELIMITERS: [&str; 3] = [",", ";", ":"];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: expected `phrase<TAB>hint`")]
    Format { line: usize },
    #[error("line {line}: unknown relation hint `{hint}`")]
    UnknownHint { line: usize, hint: String },
    #[error("line {line}: duplicate phrase `{phrase}`")]
    DuplicatePhrase { line: usize, phrase: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub phrase: String,
    pub hint: RelationLabel,
}

#[derive(Debug, Clone, Default)]
pub struct SignalLexicon {
    entries: Vec<LexiconEntry>,
    index: HashMap<String, usize>,
    longest: usize,
}

impl SignalLexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        load_lexicon(DEFAULT_LEXICON).expect("builtin lexicon is valid")
    }

    pub fn from_entries<I, S>(entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (S, RelationLabel)>,
        S: AsRef<str>,
    {
        let mut lex = SignalLexicon::default();
        for (i, (phrase, hint)) in entries.into_iter().enumerate() {
            lex.insert(phrase.as_ref(), hint, i + 1)?;
        }
        Ok(lex)
    }

    fn insert(&mut self, phrase: &str, hint: RelationLabel, line: usize) -> Result<(), LexiconError> {
        let words: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
        if words.is_empty() {
            return Err(LexiconError::Format { line });
        }
        let key = words.join(" ");
        if self.index.contains_key(&key) {
            return Err(LexiconError::DuplicatePhrase { line, phrase: key });
        }
        self.longest = self.longest.max(words.len());
        self.index.insert(key.clone(), self.entries.len());
        self.entries.push(LexiconEntry { phrase: key, hint });
        Ok(())
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Hint for a lower-cased, single-space-joined phrase.
    pub fn hint(&self, phrase: &str) -> Option<RelationLabel> {
        self.index.get(phrase).map(|&i| self.entries[i].hint)
    }

    /// Token length of the longest phrase.
    pub fn max_len(&self) -> usize {
        self.longest
    }
}

/// Parses `phrase<TAB>hint` lines; `#` starts a comment line.
pub fn load_lexicon(input: &str) -> Result<SignalLexicon, LexiconError> {
    let mut lex = SignalLexicon::default();
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let (phrase, hint) = raw.split_once('\t').ok_or(LexiconError::Format { line })?;
        let hint_text = hint.trim();
        let hint = hint_text
            .parse::<RelationLabel>()
            .map_err(|_| LexiconError::UnknownHint { line, hint: hint_text.to_string() })?;
        lex.insert(phrase, hint, line)?;
    }
    Ok(lex)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalMention {
    pub span: Span,
    pub phrase: String,
    pub hint: RelationLabel,
}

/// Every lexicon phrase occurring in `sentence`, keeping the longest of any
/// nested or overlapping matches, in textual order.
pub fn identify_signals(sentence: &Sentence, lexicon: &SignalLexicon) -> Vec<SignalMention> {
    let lowered: Vec<String> = sentence.tokens.iter().map(|t| t.to_lowercase()).collect();
    let n = lowered.len();
    let mut windows = Vec::new();
    for start in 0..n {
        for len in 1..=lexicon.max_len().min(n - start) {
            if lexicon.hint(&lowered[start..start + len].join(" ")).is_some() {
                windows.push((start, start + len));
            }
        }
    }
    select_maximal(&windows)
        .into_iter()
        .map(|(s, e)| {
            let phrase = lowered[s..e].join(" ");
            let hint = lexicon.hint(&phrase).expect("window matched a phrase");
            SignalMention { span: Span::new(sentence.index, s, e).expect("non-empty window"), phrase, hint }
        })
        .collect()
}

/// Clause segment of each token; delimiter tokens belong to none.
pub fn clause_segments(sentence: &Sentence) -> Vec<Option<usize>> {
    let mut segment = 0;
    sentence
        .tokens
        .iter()
        .map(|t| {
            if CLAUSE_DELIMITERS.contains(&t.as_str()) {
                segment += 1;
                None
            } else {
                Some(segment)
            }
        })
        .collect()
}

/// Smallest distance between a token of `a` and a token of `b`; zero when
/// they overlap.
pub fn token_gap(a: &Span, b: &Span) -> usize {
    if a.end() <= b.start() {
        b.start() - a.end() + 1
    } else if b.end() <= a.start() {
        a.start() - b.end() + 1
    } else {
        0
    }
}

/// Picks the signal for a pair of arguments: among mentions sharing a
/// clause segment with either argument, the one closest to the nearer
/// argument, the earlier one on a tie. Arguments in different sentences
/// never get a signal.
pub fn associate_signal<'a>(
    arg1: &Span,
    arg2: &Span,
    sentence: &Sentence,
    signals: &'a [SignalMention],
) -> Option<&'a SignalMention> {
    if arg1.sentence() != sentence.index || arg2.sentence() != sentence.index {
        return None;
    }
    let segments = clause_segments(sentence);
    let segs_of =
        |span: &Span| -> Vec<usize> { segments[span.start()..span.end()].iter().flatten().copied().collect() };
    let arg_segments: Vec<usize> = segs_of(arg1).into_iter().chain(segs_of(arg2)).collect();

    signals
        .iter()
        .filter(|m| m.span.sentence() == sentence.index)
        .filter(|m| !m.span.overlaps(arg1) && !m.span.overlaps(arg2))
        .filter(|m| segs_of(&m.span).iter().any(|s| arg_segments.contains(s)))
        .min_by_key(|m| (token_gap(&m.span, arg1).min(token_gap(&m.span, arg2)), m.span.start()))
}
