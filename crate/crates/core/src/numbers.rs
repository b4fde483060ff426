//! Numeric words and quantities.
//!
//! The word lists here are the same closed vocabulary the shipped ruleset
//! uses for its number alternations.

use std::fmt;

/// Cardinal words with their values. Multipliers are listed separately.
pub const CARDINALS: [(&str, u64); 27] = [
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
    ("eleven", 11),
    ("twelve", 12),
    ("thirteen", 13),
    ("fourteen", 14),
    ("fifteen", 15),
    ("sixteen", 16),
    ("seventeen", 17),
    ("eighteen", 18),
    ("nineteen", 19),
    ("twenty", 20),
    ("thirty", 30),
    ("forty", 40),
    ("fifty", 50),
    ("sixty", 60),
    ("seventy", 70),
    ("eighty", 80),
    ("ninety", 90),
];

pub const MULTIPLIERS: [(&str, u64); 4] =
    [("dozen", 12), ("hundred", 100), ("thousand", 1_000), ("million", 1_000_000)];

/// Words for an unspecified amount, rendered as `X`.
pub const IMPRECISE: [&str; 4] = ["few", "several", "some", "many"];

/// A positive count, or an unspecified one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Exact(u64),
    Imprecise,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(n) => write!(f, "{n}"),
            Quantity::Imprecise => f.write_str("X"),
        }
    }
}

fn cardinal(word: &str) -> Option<u64> {
    CARDINALS.iter().find(|(w, _)| *w == word).map(|&(_, v)| v)
}

fn multiplier(word: &str) -> Option<u64> {
    MULTIPLIERS.iter().find(|(w, _)| *w == word).map(|&(_, v)| v)
}

fn is_imprecise(word: &str) -> bool {
    IMPRECISE.contains(&word)
}

/// `"7"`, `"1,000"`; fractional forms are rejected.
fn digits(word: &str) -> Option<u64> {
    let plain: String = word.chars().filter(|&c| c != ',').collect();
    if plain.is_empty() || !plain.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    plain.parse().ok()
}

/// Value of a single word that can sit inside a number run, including
/// hyphenated compounds such as `twenty-five`.
enum Piece {
    Add(u64),
    Scale(u64),
}

fn piece(word: &str) -> Option<Vec<Piece>> {
    if let Some(v) = cardinal(word) {
        return Some(vec![Piece::Add(v)]);
    }
    if let Some(m) = multiplier(word) {
        return Some(vec![Piece::Scale(m)]);
    }
    if word.contains('-') {
        let parts: Option<Vec<u64>> = word.split('-').map(cardinal).collect();
        if let Some(parts) = parts {
            if parts.len() > 1 {
                return Some(parts.into_iter().map(Piece::Add).collect());
            }
        }
    }
    None
}

/// Finds the first number in `tokens` and returns its value.
///
/// Digit tokens and runs of numeric words (`seven hundred`, `twenty-five`,
/// `one hundred and five`) give exact values; a leading `a`/`an` counts as
/// one; imprecise words (`few`, `several`, ...) give [`Quantity::Imprecise`].
pub fn parse_numeric_words<S: AsRef<str>>(tokens: &[S]) -> Option<Quantity> {
    let words: Vec<String> = tokens.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let mut i = 0;
    while i < words.len() {
        let w = words[i].as_str();
        if is_imprecise(w) {
            return Some(Quantity::Imprecise);
        }
        if let Some(v) = digits(w) {
            return (v > 0).then_some(Quantity::Exact(v));
        }
        if w == "a" || w == "an" {
            match words.get(i + 1).map(String::as_str) {
                Some(next) if is_imprecise(next) => return Some(Quantity::Imprecise),
                Some(next) if piece(next).is_some() => return run_value(&words[i + 1..], 1),
                _ => return Some(Quantity::Exact(1)),
            }
        }
        if piece(w).is_some() {
            return run_value(&words[i..], 0);
        }
        i += 1;
    }
    None
}

fn run_value(words: &[String], seed: u64) -> Option<Quantity> {
    let mut total: u64 = 0;
    let mut current: u64 = seed;
    let mut k = 0;
    while k < words.len() {
        let w = words[k].as_str();
        // "and" only continues a run when another number word follows.
        if w == "and" && words.get(k + 1).is_some_and(|n| piece(n).is_some()) {
            k += 1;
            continue;
        }
        let Some(pieces) = piece(w) else { break };
        for p in pieces {
            match p {
                Piece::Add(v) => current = current.saturating_add(v),
                Piece::Scale(m) if m >= 1_000 => {
                    total = total.saturating_add(current.max(1).saturating_mul(m));
                    current = 0;
                }
                Piece::Scale(m) => current = current.max(1).saturating_mul(m),
            }
        }
        k += 1;
    }
    let value = total.saturating_add(current);
    (value > 0).then_some(Quantity::Exact(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(words: &[&str]) -> Option<Quantity> {
        parse_numeric_words(words)
    }

    #[test]
    fn documented_examples() {
        assert_eq!(q(&["seven", "hundred"]), Some(Quantity::Exact(700)));
        assert_eq!(q(&["few", "weeks"]), Some(Quantity::Imprecise));
        assert_eq!(q(&["a", "month"]), Some(Quantity::Exact(1)));
    }

    #[test]
    fn compounds() {
        assert_eq!(q(&["twenty-five", "years"]), Some(Quantity::Exact(25)));
        assert_eq!(q(&["twenty", "five", "years"]), Some(Quantity::Exact(25)));
        assert_eq!(q(&["one", "hundred", "and", "five", "days"]), Some(Quantity::Exact(105)));
        assert_eq!(q(&["two", "thousand", "three", "hundred"]), Some(Quantity::Exact(2300)));
        assert_eq!(q(&["a", "hundred", "years"]), Some(Quantity::Exact(100)));
        assert_eq!(q(&["a", "dozen", "years"]), Some(Quantity::Exact(12)));
        assert_eq!(q(&["two", "dozen"]), Some(Quantity::Exact(24)));
        assert_eq!(q(&["Seven", "Years"]), Some(Quantity::Exact(7)));
    }

    #[test]
    fn digits_and_imprecise() {
        assert_eq!(q(&["the", "past", "3", "years"]), Some(Quantity::Exact(3)));
        assert_eq!(q(&["1,000", "days"]), Some(Quantity::Exact(1000)));
        assert_eq!(q(&["a", "few", "days"]), Some(Quantity::Imprecise));
        assert_eq!(q(&["several", "months"]), Some(Quantity::Imprecise));
    }

    #[test]
    fn absent() {
        assert_eq!(q(&["last", "year"]), None);
        assert_eq!(q(&[]), None);
        assert_eq!(q(&["0", "days"]), None);
    }
}
