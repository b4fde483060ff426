//! Timex typing and value normalization.
//!
//! Types come from three surface rules: a preceding `for`/`during` within
//! three tokens, a final `s`, or a two-token expression starting with `a`
//! make a DURATION; everything else is a DATE. Values are either durations
//! (`P7Y`, `PXW`) or dates anchored against the document creation time.

use std::fmt;

use chrono::{Datelike, NaiveDate, Weekday};
use thiserror::Error;

use crate::calendar::{self, AnchoredDate, CalendarDate, Granularity};
use crate::corpus::{Document, Span, TimexAnnotation, TimexType};

pub use crate::numbers::{parse_numeric_words, Quantity};

/// Value assigned to literal `today`/`now`.
pub const PRESENT_REF: &str = "PRESENT_REF";

/// Half-width of the weekday window: a bare weekday resolves to the
/// matching day within three days either side of the DCT.
pub const BALDWIN_RADIUS: i64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("unanchorable: {0}")]
    Unanchorable(String),
    #[error("no occurrence of {month:02}-{day:02} near {dct}")]
    NoOccurrence { month: u32, day: u32, dct: NaiveDate },
    #[error("date arithmetic left the supported range")]
    OutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizerConfig {
    /// Year-less month/day expressions more than this many days ahead of
    /// the DCT are taken to be in the past.
    pub f_days: i64,
}

impl NormalizerConfig {
    pub fn baldwin_radius(&self) -> i64 {
        BALDWIN_RADIUS
    }
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        Self { f_days: 14 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemporalUnit {
    Day,
    Week,
    Month,
    Quarter,
    Year,
}

impl TemporalUnit {
    /// Parses a unit word, singular or plural.
    pub fn from_word(word: &str) -> Option<Self> {
        let w = word.to_lowercase();
        let unit = match w.strip_suffix('s').unwrap_or(&w) {
            "day" => TemporalUnit::Day,
            "week" => TemporalUnit::Week,
            "month" => TemporalUnit::Month,
            "quarter" => TemporalUnit::Quarter,
            "year" => TemporalUnit::Year,
            _ => return None,
        };
        Some(unit)
    }

    fn granularity(self) -> Granularity {
        match self {
            TemporalUnit::Day => Granularity::Day,
            TemporalUnit::Week => Granularity::Week,
            TemporalUnit::Month | TemporalUnit::Quarter => Granularity::Month,
            TemporalUnit::Year => Granularity::Year,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Past,
    Future,
    None,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Past => "PAST",
            Direction::Future => "FUTURE",
            Direction::None => "NONE",
        })
    }
}

const DURATION_TRIGGERS: [&str; 2] = ["for", "during"];

/// DURATION when `for`/`during` occurs among the three preceding tokens,
/// the surface ends in `s`, or the span is `a <word>`; DATE otherwise.
pub fn classify_type(span: &Span, document: &Document) -> TimexType {
    let sentence = &document.sentences[span.sentence()];
    let before = &sentence.tokens[span.start().saturating_sub(3)..span.start()];
    if before.iter().any(|t| DURATION_TRIGGERS.iter().any(|w| t.eq_ignore_ascii_case(w))) {
        return TimexType::Duration;
    }
    let tokens = document.tokens(span);
    let ends_with_s = tokens.last().and_then(|t| t.chars().last()).is_some_and(|c| c.eq_ignore_ascii_case(&'s'));
    if ends_with_s {
        return TimexType::Duration;
    }
    if tokens.len() == 2 && tokens[0].eq_ignore_ascii_case("a") {
        return TimexType::Duration;
    }
    TimexType::Date
}

/// Anchors a bare weekday to the matching day in the seven-day window
/// centred on `dct`.
pub fn resolve_weekday(weekday: Weekday, dct: NaiveDate) -> NaiveDate {
    let forward = (weekday.num_days_from_monday() as i64 - dct.weekday().num_days_from_monday() as i64).rem_euclid(7);
    let offset = if forward > BALDWIN_RADIUS { forward - 7 } else { forward };
    calendar::add_days(dct, offset).expect("weekday window stays in range")
}

/// Longest gap between two 29 Februaries, in years.
const LEAP_SPAN: i32 = 8;

fn occurrence(year: i32, month: u32, day: u32) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(year, month, day)
}

fn next_occurrence(month: u32, day: u32, dct: NaiveDate, strict: bool) -> Option<NaiveDate> {
    (dct.year()..=dct.year() + LEAP_SPAN).filter_map(|y| occurrence(y, month, day)).find(|d| {
        if strict {
            *d > dct
        } else {
            *d >= dct
        }
    })
}

fn previous_occurrence(month: u32, day: u32, dct: NaiveDate) -> Option<NaiveDate> {
    (dct.year() - LEAP_SPAN..=dct.year()).rev().filter_map(|y| occurrence(y, month, day)).find(|d| *d < dct)
}

/// Year resolution for a month/day without a year: the next occurrence on
/// or after `dct` if it is at most `f_days` away, otherwise the most recent
/// past occurrence. For 29 February the nearest leap years are used.
pub fn resolve_month_day(
    month: u32,
    day: u32,
    dct: NaiveDate,
    config: &NormalizerConfig,
) -> Result<NaiveDate, NormalizeError> {
    let missing = || NormalizeError::NoOccurrence { month, day, dct };
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return Err(missing());
    }
    if let Some(next) = next_occurrence(month, day, dct, false) {
        if (next - dct).num_days() <= config.f_days {
            return Ok(next);
        }
    }
    previous_occurrence(month, day, dct).ok_or_else(missing)
}

/// Shifts `dct` by `quantity` units in `direction` and truncates the result
/// to the unit's granularity. Months are shifted exactly with the day
/// clamped; a quarter is three months and a year twelve.
pub fn apply_offset(
    dct: NaiveDate,
    direction: Direction,
    quantity: Quantity,
    unit: TemporalUnit,
) -> Result<AnchoredDate, NormalizeError> {
    let Quantity::Exact(n) = quantity else {
        return Err(NormalizeError::Unanchorable("imprecise quantity cannot anchor a date".into()));
    };
    let sign: i64 = match direction {
        Direction::Past => -1,
        Direction::Future => 1,
        Direction::None => {
            return Err(NormalizeError::Unanchorable("offset without a direction".into()));
        }
    };
    let n = i64::try_from(n).map_err(|_| NormalizeError::OutOfRange)?;
    let steps = n.checked_mul(sign).ok_or(NormalizeError::OutOfRange)?;
    let shifted = match unit {
        TemporalUnit::Day => calendar::add_days(dct, steps),
        TemporalUnit::Week => steps.checked_mul(7).and_then(|d| calendar::add_days(dct, d)),
        TemporalUnit::Month => calendar::add_months(dct, steps),
        TemporalUnit::Quarter => steps.checked_mul(3).and_then(|m| calendar::add_months(dct, m)),
        TemporalUnit::Year => steps.checked_mul(12).and_then(|m| calendar::add_months(dct, m)),
    }
    .ok_or(NormalizeError::OutOfRange)?;
    AnchoredDate::from_day(shifted, unit.granularity()).map_err(|_| NormalizeError::OutOfRange)
}

/// `P` + count (or `X`) + unit letter; quarters become months.
pub fn duration_value(quantity: Quantity, unit: TemporalUnit) -> String {
    let (count, letter) = match (quantity, unit) {
        (Quantity::Exact(n), TemporalUnit::Quarter) => (n.saturating_mul(3).to_string(), 'M'),
        (q, TemporalUnit::Quarter) => (q.to_string(), 'M'),
        (q, TemporalUnit::Day) => (q.to_string(), 'D'),
        (q, TemporalUnit::Week) => (q.to_string(), 'W'),
        (q, TemporalUnit::Month) => (q.to_string(), 'M'),
        (q, TemporalUnit::Year) => (q.to_string(), 'Y'),
    };
    format!("P{count}{letter}")
}

/// Type plus value (or the reason no value could be found) for one span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub ttype: TimexType,
    pub value: Result<String, NormalizeError>,
}

impl Normalized {
    pub fn into_annotation(self, id: impl Into<String>, span: Span) -> TimexAnnotation {
        TimexAnnotation { id: id.into(), span, ttype: Some(self.ttype), value: self.value.ok() }
    }
}

/// Relative position cue found inside a timex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cue {
    Shift(Direction),
    Current,
}

fn direction_cue(words: &[String]) -> Cue {
    for (i, w) in words.iter().enumerate() {
        match w.as_str() {
            "last" | "ago" | "past" | "previous" => return Cue::Shift(Direction::Past),
            "next" | "coming" | "in" => return Cue::Shift(Direction::Future),
            "from" if words.get(i + 1).is_some_and(|n| n == "now") => return Cue::Shift(Direction::Future),
            "this" => return Cue::Current,
            _ => {}
        }
    }
    Cue::Shift(Direction::None)
}

fn day_number(word: &str) -> Option<u32> {
    let digits = word.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = &word[digits.len()..];
    if digits.is_empty() || digits.len() > 2 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !matches!(suffix, "" | "st" | "nd" | "rd" | "th") {
        return None;
    }
    let d: u32 = digits.parse().ok()?;
    (1..=31).contains(&d).then_some(d)
}

fn year_number(word: &str) -> Option<i32> {
    (word.len() == 4 && word.bytes().all(|b| b.is_ascii_digit())).then(|| word.parse().ok()).flatten()
}

/// Explicit calendar pieces found in a timex.
#[derive(Debug, Default)]
struct DateParts {
    year: Option<i32>,
    month: Option<u32>,
    day: Option<u32>,
}

fn explicit_parts(words: &[String]) -> DateParts {
    let mut parts = DateParts::default();
    let month_at = words.iter().position(|w| calendar::month_from_name(w).is_some());
    if let Some(m) = month_at {
        parts.month = calendar::month_from_name(&words[m]);
        parts.day = words.get(m + 1).and_then(|w| day_number(w)).or_else(|| {
            let before = if m >= 2 && words[m - 1] == "of" { m - 2 } else { m.checked_sub(1)? };
            day_number(&words[before])
        });
    }
    parts.year = words.iter().find_map(|w| year_number(w));
    parts
}

fn most_recent_month(month: u32, dct: NaiveDate) -> Result<CalendarDate, NormalizeError> {
    let year = if month < dct.month() { dct.year() } else { dct.year() - 1 };
    CalendarDate::year_month(year, month).map_err(|_| NormalizeError::OutOfRange)
}

fn next_month(month: u32, dct: NaiveDate) -> Result<CalendarDate, NormalizeError> {
    let year = if month > dct.month() { dct.year() } else { dct.year() + 1 };
    CalendarDate::year_month(year, month).map_err(|_| NormalizeError::OutOfRange)
}

fn anchor_explicit(
    parts: &DateParts,
    cue: Cue,
    dct: NaiveDate,
    config: &NormalizerConfig,
) -> Result<String, NormalizeError> {
    let out_of_range = |_| NormalizeError::OutOfRange;
    let value = match (parts.year, parts.month, parts.day) {
        (Some(y), Some(m), Some(d)) => {
            CalendarDate::ymd(y, m, d).map_err(|e| NormalizeError::Unanchorable(e.to_string()))?
        }
        (Some(y), Some(m), None) => CalendarDate::year_month(y, m).map_err(out_of_range)?,
        (Some(y), None, _) => CalendarDate::year_only(y).map_err(out_of_range)?,
        (None, Some(m), Some(d)) => {
            let date = match cue {
                Cue::Shift(Direction::Past) => previous_occurrence(m, d, dct),
                Cue::Shift(Direction::Future) => next_occurrence(m, d, dct, true),
                _ => Some(resolve_month_day(m, d, dct, config)?),
            }
            .ok_or(NormalizeError::NoOccurrence { month: m, day: d, dct })?;
            CalendarDate::from_naive(date).map_err(out_of_range)?
        }
        (None, Some(m), None) => match cue {
            Cue::Shift(Direction::Past) => most_recent_month(m, dct)?,
            Cue::Shift(Direction::Future) => next_month(m, dct)?,
            Cue::Current => CalendarDate::year_month(dct.year(), m).map_err(out_of_range)?,
            Cue::Shift(Direction::None) if m == dct.month() => {
                CalendarDate::year_month(dct.year(), m).map_err(out_of_range)?
            }
            Cue::Shift(Direction::None) => {
                let first = resolve_month_day(m, 1, dct, config)?;
                CalendarDate::from_naive(first).map_err(out_of_range)?.truncate(Granularity::Month)
            }
        },
        (None, None, _) => return Err(NormalizeError::Unanchorable("no calendar fields".into())),
    };
    Ok(value.to_string())
}

fn anchor_weekday(weekday: Weekday, cue: Cue, dct: NaiveDate) -> NaiveDate {
    let gap = |from: Weekday, to: Weekday| {
        (to.num_days_from_monday() as i64 - from.num_days_from_monday() as i64).rem_euclid(7)
    };
    let shift = match cue {
        Cue::Shift(Direction::Past) => match gap(weekday, dct.weekday()) {
            0 => -7,
            g => -g,
        },
        Cue::Shift(Direction::Future) => match gap(dct.weekday(), weekday) {
            0 => 7,
            g => g,
        },
        _ => return resolve_weekday(weekday, dct),
    };
    calendar::add_days(dct, shift).expect("weekday shift stays in range")
}

fn anchor_date(words: &[String], dct: NaiveDate, config: &NormalizerConfig) -> Result<String, NormalizeError> {
    let cue = direction_cue(words);
    let parts = explicit_parts(words);
    if parts.year.is_some() || parts.month.is_some() {
        return anchor_explicit(&parts, cue, dct, config);
    }
    if let Some(weekday) = words.iter().find_map(|w| calendar::weekday_from_name(w)) {
        return Ok(anchor_weekday(weekday, cue, dct).format("%Y-%m-%d").to_string());
    }
    if let Some(deictic) = words.iter().find_map(|w| match w.as_str() {
        "yesterday" => Some(Direction::Past),
        "tomorrow" => Some(Direction::Future),
        _ => None,
    }) {
        return Ok(apply_offset(dct, deictic, Quantity::Exact(1), TemporalUnit::Day)?.to_string());
    }
    let Some(unit) = words.iter().find_map(|w| TemporalUnit::from_word(w)) else {
        return Err(NormalizeError::Unanchorable("no date, weekday or unit".into()));
    };
    match cue {
        Cue::Current => {
            Ok(AnchoredDate::from_day(dct, unit.granularity()).map_err(|_| NormalizeError::OutOfRange)?.to_string())
        }
        Cue::Shift(Direction::None) => Err(NormalizeError::Unanchorable("unit without a direction".into())),
        Cue::Shift(direction) => {
            let quantity = parse_numeric_words(words).unwrap_or(Quantity::Exact(1));
            Ok(apply_offset(dct, direction, quantity, unit)?.to_string())
        }
    }
}

fn duration(words: &[String]) -> Result<String, NormalizeError> {
    let (unit, plural) = words
        .iter()
        .find_map(|w| TemporalUnit::from_word(w).map(|u| (u, w.ends_with('s'))))
        .ok_or_else(|| NormalizeError::Unanchorable("duration without a unit".into()))?;
    let quantity = parse_numeric_words(words).unwrap_or(if plural { Quantity::Imprecise } else { Quantity::Exact(1) });
    Ok(duration_value(quantity, unit))
}

/// Types and values `span`, anchoring against the document's DCT.
pub fn normalize(span: &Span, document: &Document, config: &NormalizerConfig) -> Normalized {
    normalize_with(span, document, config, false)
}

/// As [`normalize`], with `force_date` overriding the type rules (used for
/// rules that mark their matches as dates).
pub fn normalize_with(span: &Span, document: &Document, config: &NormalizerConfig, force_date: bool) -> Normalized {
    let words: Vec<String> = document
        .tokens(span)
        .iter()
        .map(|t| t.to_lowercase().trim_end_matches('.').to_string())
        .filter(|t| !t.is_empty() && t != ",")
        .collect();
    let mut ttype = if force_date { TimexType::Date } else { classify_type(span, document) };

    let surface = words.join(" ");
    if surface == "today" || surface == "now" {
        ttype = TimexType::Date;
        return Normalized { ttype, value: Ok(PRESENT_REF.to_string()) };
    }
    let value = match ttype {
        TimexType::Duration => duration(&words),
        TimexType::Date => {
            let dct = document.dct.to_naive().expect("document DCT is day-granular");
            anchor_date(&words, dct, config)
        }
    };
    Normalized { ttype, value }
}
