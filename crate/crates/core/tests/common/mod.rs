//! Reference implementations used as oracles by the integration tests.
//!
//! Everything here is written independently of the library: the calendar
//! is walked one day at a time, and span selection is done by exhaustive
//! search over windows.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use regex::RegexBuilder;

// ---------------------------------------------------------------- calendar

pub fn is_leap(y: i32) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

pub fn days_in_month(y: i32, m: u32) -> u32 {
    match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(y) => 29,
        2 => 28,
        _ => panic!("month {m}"),
    }
}

/// A proleptic Gregorian day with a Monday-based weekday index (0..7).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Day {
    pub y: i32,
    pub m: u32,
    pub d: u32,
    pub wd: u32,
}

impl Day {
    /// 1995-01-01 was a Sunday.
    pub fn epoch() -> Day {
        Day { y: 1995, m: 1, d: 1, wd: 6 }
    }

    pub fn succ(self) -> Day {
        let wd = (self.wd + 1) % 7;
        if self.d < days_in_month(self.y, self.m) {
            Day { d: self.d + 1, wd, ..self }
        } else if self.m < 12 {
            Day { m: self.m + 1, d: 1, wd, ..self }
        } else {
            Day { y: self.y + 1, m: 1, d: 1, wd }
        }
    }

    pub fn pred(self) -> Day {
        let wd = (self.wd + 6) % 7;
        if self.d > 1 {
            Day { d: self.d - 1, wd, ..self }
        } else if self.m > 1 {
            Day { m: self.m - 1, d: days_in_month(self.y, self.m - 1), wd, ..self }
        } else {
            Day { y: self.y - 1, m: 12, d: 31, wd }
        }
    }

    /// Walks from the epoch; only for days not far from it.
    pub fn of(y: i32, m: u32, d: u32) -> Day {
        let mut day = Day::epoch();
        let target = (y, m, d);
        while (day.y, day.m, day.d) < target {
            day = day.succ();
        }
        while (day.y, day.m, day.d) > target {
            day = day.pred();
        }
        day
    }

    pub fn ymd(&self) -> (i32, u32, u32) {
        (self.y, self.m, self.d)
    }
}

/// Bare-weekday oracle: scan the seven days around `dct`.
pub fn weekday_oracle(weekday: u32, dct: Day) -> Day {
    let mut day = dct.pred().pred().pred();
    for _ in 0..7 {
        if day.wd == weekday {
            return day;
        }
        day = day.succ();
    }
    unreachable!("every weekday occurs in seven consecutive days")
}

/// Year-less month/day oracle: count days forward to the next occurrence;
/// keep it when at most `f` days away, otherwise walk back to the previous
/// occurrence.
pub fn f_rule_oracle(month: u32, day: u32, dct: Day, f: i64) -> Day {
    let mut next = dct;
    let mut delta = 0i64;
    while (next.m, next.d) != (month, day) {
        next = next.succ();
        delta += 1;
    }
    if delta <= f {
        return next;
    }
    let mut prev = dct.pred();
    while (prev.m, prev.d) != (month, day) {
        prev = prev.pred();
    }
    prev
}

// ------------------------------------------------------- span selection

/// Maximal windows by exhaustive search: drop windows strictly inside
/// another, then repeatedly take the longest remaining window (leftmost
/// among equals) and discard everything overlapping it.
pub fn maximal_oracle(windows: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut distinct: Vec<(usize, usize)> = Vec::new();
    for w in windows {
        if !distinct.contains(w) {
            distinct.push(*w);
        }
    }
    let inside = |a: &(usize, usize), b: &(usize, usize)| a != b && b.0 <= a.0 && a.1 <= b.1;
    let mut pool: Vec<(usize, usize)> =
        distinct.iter().copied().filter(|a| !distinct.iter().any(|b| inside(a, b))).collect();
    let mut out = Vec::new();
    while !pool.is_empty() {
        let mut best = pool[0];
        for &w in &pool {
            let (wl, bl) = (w.1 - w.0, best.1 - best.0);
            if wl > bl || (wl == bl && w.0 < best.0) {
                best = w;
            }
        }
        out.push(best);
        pool.retain(|w| w.1 <= best.0 || best.1 <= w.0);
    }
    out.sort();
    out
}

/// Every window of up to `max_n` tokens whose space-joined text fully
/// matches one of `patterns`, case-insensitively.
pub fn matching_windows(tokens: &[String], patterns: &[String], max_n: usize) -> Vec<(usize, usize)> {
    let regexes: Vec<_> = patterns
        .iter()
        .map(|p| RegexBuilder::new(&format!("^(?:{p})$")).case_insensitive(true).build().unwrap())
        .collect();
    let mut out = Vec::new();
    for s in 0..tokens.len() {
        for e in s + 1..=tokens.len().min(s + max_n) {
            let text = tokens[s..e].join(" ");
            if regexes.iter().any(|r| r.is_match(&text)) {
                out.push((s, e));
            }
        }
    }
    out
}

pub fn recognizer_oracle(tokens: &[String], patterns: &[String], max_n: usize) -> Vec<(usize, usize)> {
    maximal_oracle(&matching_windows(tokens, patterns, max_n))
}

/// Windows of any length whose lower-cased text equals a phrase.
pub fn signal_oracle(tokens: &[String], phrases: &[String]) -> Vec<(usize, usize)> {
    let mut windows = Vec::new();
    for s in 0..tokens.len() {
        for e in s + 1..=tokens.len() {
            let text = tokens[s..e].iter().map(|t| t.to_lowercase()).collect::<Vec<_>>().join(" ");
            if phrases.contains(&text) {
                windows.push((s, e));
            }
        }
    }
    maximal_oracle(&windows)
}

/// Brute-force signal association: clause ids per token, distances as the
/// smallest index difference between any two tokens.
pub fn association_oracle(
    tokens: &[String],
    arg1: (usize, usize),
    arg2: (usize, usize),
    signals: &[(usize, usize)],
) -> Option<usize> {
    let mut clause = Vec::new();
    let mut c = 0;
    for t in tokens {
        if t == "," || t == ";" || t == ":" {
            c += 1;
            clause.push(None);
        } else {
            clause.push(Some(c));
        }
    }
    let clauses = |w: (usize, usize)| -> Vec<usize> { (w.0..w.1).filter_map(|i| clause[i]).collect() };
    let shares = |a: (usize, usize), b: (usize, usize)| clauses(a).iter().any(|x| clauses(b).contains(x));
    let dist = |a: (usize, usize), b: (usize, usize)| -> usize {
        let mut best = usize::MAX;
        for i in a.0..a.1 {
            for j in b.0..b.1 {
                best = best.min(i.abs_diff(j));
            }
        }
        best
    };
    let mut best: Option<(usize, usize)> = None;
    for (k, &s) in signals.iter().enumerate() {
        let d = dist(s, arg1).min(dist(s, arg2));
        if d == 0 || !(shares(s, arg1) || shares(s, arg2)) {
            continue;
        }
        match best {
            Some((bd, bk)) if bd < d || (bd == d && signals[bk].0 <= s.0) => {}
            _ => best = Some((d, k)),
        }
    }
    best.map(|(_, k)| k)
}

// ------------------------------------------------------ random rulesets

const VOCAB: [&str; 6] = ["a", "b", "c", "d", "x", "y"];

fn random_atom<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..4) {
        0 | 1 => VOCAB.choose(rng).unwrap().to_string(),
        2 => {
            let a = VOCAB.choose(rng).unwrap();
            let b = VOCAB.choose(rng).unwrap();
            format!("(?:{a}|{b})")
        }
        _ => "[a-d]".to_string(),
    }
}

/// A pattern of one to three space-separated atoms, sometimes with an
/// optional trailing atom.
pub fn random_pattern<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..=3);
    let mut p = (0..n).map(|_| random_atom(rng)).collect::<Vec<_>>().join(" ");
    if rng.gen_bool(0.25) {
        p.push_str(&format!("(?: {})?", random_atom(rng)));
    }
    p
}

pub fn random_patterns<R: Rng>(rng: &mut R) -> Vec<String> {
    let n = rng.gen_range(1..=5);
    (0..n).map(|_| random_pattern(rng)).collect()
}

pub fn random_tokens<R: Rng>(rng: &mut R, max_len: usize) -> Vec<String> {
    let n = rng.gen_range(1..=max_len);
    (0..n)
        .map(|_| {
            let w = VOCAB.choose(rng).unwrap();
            if rng.gen_bool(0.2) {
                w.to_uppercase()
            } else {
                w.to_string()
            }
        })
        .collect()
}

pub fn ruleset_text(patterns: &[String]) -> String {
    patterns.iter().enumerate().map(|(i, p)| format!("r{i}\t{p}\n")).collect()
}

// ------------------------------------------------- synthetic relations

use timelabel::calendar::CalendarDate;
use timelabel::corpus::{Document, EventAnnotation, Polarity, RelationInstance, Span, TimexAnnotation, TimexType};
use timelabel::signals::SignalLexicon;

const FILLER: [&str; 7] = ["the", "officials", "said", "it", "would", "again", "reports"];
const EVENT_WORDS: [&str; 6] = ["met", "signed", "rose", "fell", "announced", "visited"];
const TIMEXES: [(&str, TimexType, &str); 5] = [
    ("Monday", TimexType::Date, "1998-03-02"),
    ("1997", TimexType::Date, "1997"),
    ("last week", TimexType::Date, "1998-W08"),
    ("two years", TimexType::Duration, "P2Y"),
    ("today", TimexType::Date, "PRESENT_REF"),
];

fn filler<R: Rng>(rng: &mut R, max: usize, out: &mut Vec<String>) {
    for _ in 0..rng.gen_range(0..=max) {
        out.push(FILLER.choose(rng).unwrap().to_string());
    }
}

/// Documents with one event/timex pair per sentence and exactly one
/// lexicon signal between them; each pair is labelled with that signal's
/// hint.
pub fn synthetic_tlinks(seed: u64, documents: usize, per_document: usize) -> Vec<Document> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let lexicon = SignalLexicon::builtin();
    let entries = lexicon.entries();
    (0..documents)
        .map(|d| {
            let mut sentences = Vec::new();
            let mut events = Vec::new();
            let mut timexes = Vec::new();
            let mut relations = Vec::new();
            for s in 0..per_document {
                let entry = entries.choose(&mut rng).unwrap();
                let (tx_text, ttype, value) = *TIMEXES.choose(&mut rng).unwrap();
                let ev_text = *EVENT_WORDS.choose(&mut rng).unwrap();
                let event_first = rng.gen_bool(0.5);
                let mut toks = Vec::new();
                filler(&mut rng, 3, &mut toks);
                let place = |toks: &mut Vec<String>, text: &str| -> Span {
                    let start = toks.len();
                    toks.extend(text.split(' ').map(String::from));
                    Span::new(s, start, toks.len()).unwrap()
                };
                let first = place(&mut toks, if event_first { ev_text } else { tx_text });
                filler(&mut rng, 2, &mut toks);
                place(&mut toks, &entry.phrase);
                filler(&mut rng, 2, &mut toks);
                let second = place(&mut toks, if event_first { tx_text } else { ev_text });
                filler(&mut rng, 3, &mut toks);
                let (ev_span, tx_span) = if event_first { (first, second) } else { (second, first) };
                events.push(EventAnnotation {
                    id: format!("e{s}"),
                    span: ev_span,
                    tense: ["PAST", "PRESENT", "FUTURE"].choose(&mut rng).unwrap().to_string(),
                    aspect: ["NONE", "PERFECTIVE"].choose(&mut rng).unwrap().to_string(),
                    polarity: Polarity::Pos,
                    modality: String::new(),
                });
                timexes.push(TimexAnnotation {
                    id: format!("t{s}"),
                    span: tx_span,
                    ttype: Some(ttype),
                    value: Some(value.to_string()),
                });
                relations.push(RelationInstance {
                    id: format!("l{s}"),
                    arg1: format!("e{s}"),
                    arg2: format!("t{s}"),
                    label: Some(entry.hint),
                });
                sentences.push(toks);
            }
            let mut doc = Document::new(format!("syn{d:03}"), CalendarDate::ymd(1998, 2, 27).unwrap(), sentences)
                .expect("generated sentences are valid");
            doc.events = events;
            doc.timexes = timexes;
            doc.relations = relations;
            doc.validate().expect("generated document is valid");
            doc
        })
        .collect()
}

/// Copies of `docs` with every relation label removed.
pub fn unlabelled(docs: &[Document]) -> Vec<Document> {
    docs.iter()
        .cloned()
        .map(|mut d| {
            for r in &mut d.relations {
                r.label = None;
            }
            d
        })
        .collect()
}
