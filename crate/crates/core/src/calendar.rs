//! Calendar values at year, month or day granularity, plus ISO weeks.
//!
//! All dates are proleptic Gregorian with no time zone. Arithmetic is
//! delegated to [`chrono::NaiveDate`]; this module only adds granularity
//! and the TIMEX-style string forms.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, Months, NaiveDate, Weekday};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalendarError {
    #[error("invalid calendar date `{0}`")]
    Invalid(String),
    #[error("year {0} is outside 0000..=9999")]
    YearOutOfRange(i32),
}

/// Finest field a calendar value expresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Granularity {
    Year,
    Month,
    Week,
    Day,
}

/// A date that may stop at year or month precision.
///
/// `day` is only ever present together with `month`, and a full
/// (year, month, day) triple is always a real Gregorian date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CalendarDate {
    year: i32,
    month: Option<u32>,
    day: Option<u32>,
}

impl CalendarDate {
    pub fn year_only(year: i32) -> Result<Self, CalendarError> {
        check_year(year)?;
        Ok(Self { year, month: None, day: None })
    }

    pub fn year_month(year: i32, month: u32) -> Result<Self, CalendarError> {
        check_year(year)?;
        if !(1..=12).contains(&month) {
            return Err(CalendarError::Invalid(format!("{year:04}-{month:02}")));
        }
        Ok(Self { year, month: Some(month), day: None })
    }

    pub fn ymd(year: i32, month: u32, day: u32) -> Result<Self, CalendarError> {
        check_year(year)?;
        NaiveDate::from_ymd_opt(year, month, day)
            .ok_or_else(|| CalendarError::Invalid(format!("{year:04}-{month:02}-{day:02}")))?;
        Ok(Self { year, month: Some(month), day: Some(day) })
    }

    pub fn from_naive(date: NaiveDate) -> Result<Self, CalendarError> {
        Self::ymd(date.year(), date.month(), date.day())
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> Option<u32> {
        self.month
    }

    pub fn day(&self) -> Option<u32> {
        self.day
    }

    pub fn granularity(&self) -> Granularity {
        match (self.month, self.day) {
            (_, Some(_)) => Granularity::Day,
            (Some(_), None) => Granularity::Month,
            _ => Granularity::Year,
        }
    }

    /// The underlying day, when this value is day-granular.
    pub fn to_naive(&self) -> Option<NaiveDate> {
        NaiveDate::from_ymd_opt(self.year, self.month?, self.day?)
    }

    pub fn truncate(&self, granularity: Granularity) -> CalendarDate {
        match granularity {
            Granularity::Year => Self { year: self.year, month: None, day: None },
            Granularity::Month => Self { year: self.year, month: self.month, day: None },
            Granularity::Week | Granularity::Day => *self,
        }
    }
}

fn check_year(year: i32) -> Result<(), CalendarError> {
    if (0..=9999).contains(&year) {
        Ok(())
    } else {
        Err(CalendarError::YearOutOfRange(year))
    }
}

impl fmt::Display for CalendarDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
        }
        if let Some(d) = self.day {
            write!(f, "-{d:02}")?;
        }
        Ok(())
    }
}

impl FromStr for CalendarDate {
    type Err = CalendarError;

    /// Accepts `YYYY`, `YYYY-MM` or `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || CalendarError::Invalid(s.to_string());
        let parts: Vec<&str> = s.split('-').collect();
        let widths = [4, 2, 2];
        if parts.is_empty() || parts.len() > 3 {
            return Err(invalid());
        }
        let mut nums = Vec::with_capacity(3);
        for (part, width) in parts.iter().zip(widths) {
            if part.len() != width || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(invalid());
            }
            nums.push(part.parse::<u32>().map_err(|_| invalid())?);
        }
        let year = nums[0] as i32;
        match nums.len() {
            1 => Self::year_only(year),
            2 => Self::year_month(year, nums[1]).map_err(|_| invalid()),
            _ => Self::ymd(year, nums[1], nums[2]).map_err(|_| invalid()),
        }
    }
}

/// An anchored DATE value: a calendar date or an ISO-8601 week.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnchoredDate {
    Calendar(CalendarDate),
    IsoWeek { year: i32, week: u32 },
}

impl AnchoredDate {
    pub fn granularity(&self) -> Granularity {
        match self {
            AnchoredDate::Calendar(d) => d.granularity(),
            AnchoredDate::IsoWeek { .. } => Granularity::Week,
        }
    }

    /// Truncate a day to `granularity`, using ISO week numbering for weeks.
    pub fn from_day(date: NaiveDate, granularity: Granularity) -> Result<Self, CalendarError> {
        if granularity == Granularity::Week {
            let iso = date.iso_week();
            check_year(iso.year())?;
            return Ok(AnchoredDate::IsoWeek { year: iso.year(), week: iso.week() });
        }
        Ok(AnchoredDate::Calendar(CalendarDate::from_naive(date)?.truncate(granularity)))
    }
}

impl fmt::Display for AnchoredDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnchoredDate::Calendar(d) => d.fmt(f),
            AnchoredDate::IsoWeek { year, week } => write!(f, "{year:04}-W{week:02}"),
        }
    }
}

pub fn add_days(date: NaiveDate, days: i64) -> Option<NaiveDate> {
    if days >= 0 {
        date.checked_add_days(Days::new(days as u64))
    } else {
        date.checked_sub_days(Days::new(days.unsigned_abs()))
    }
}

/// Month arithmetic with the day clamped to the target month's length.
pub fn add_months(date: NaiveDate, months: i64) -> Option<NaiveDate> {
    let m = u32::try_from(months.unsigned_abs()).ok()?;
    if months >= 0 {
        date.checked_add_months(Months::new(m))
    } else {
        date.checked_sub_months(Months::new(m))
    }
}

pub fn weekday_from_name(word: &str) -> Option<Weekday> {
    let w = word.to_ascii_lowercase();
    let day = match w.as_str() {
        "monday" | "mon" => Weekday::Mon,
        "tuesday" | "tue" | "tues" => Weekday::Tue,
        "wednesday" | "wed" => Weekday::Wed,
        "thursday" | "thu" | "thurs" => Weekday::Thu,
        "friday" | "fri" => Weekday::Fri,
        "saturday" | "sat" => Weekday::Sat,
        "sunday" | "sun" => Weekday::Sun,
        _ => return None,
    };
    Some(day)
}

pub fn month_from_name(word: &str) -> Option<u32> {
    let w = word.trim_end_matches('.').to_ascii_lowercase();
    const NAMES: [&str; 12] = [
        "january",
        "february",
        "march",
        "april",
        "may",
        "june",
        "july",
        "august",
        "september",
        "october",
        "november",
        "december",
    ];
    if let Some(i) = NAMES.iter().position(|n| *n == w) {
        return Some(i as u32 + 1);
    }
    let abbrev = match w.as_str() {
        "jan" => 1,
        "feb" => 2,
        "mar" => 3,
        "apr" => 4,
        "jun" => 6,
        "jul" => 7,
        "aug" => 8,
        "sep" | "sept" => 9,
        "oct" => 10,
        "nov" => 11,
        "dec" => 12,
        _ => return None,
    };
    Some(abbrev)
}
