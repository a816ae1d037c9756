//! Granular time values, Allen interval relations and TimeML relation types.
//!
//! A [`TimeValue`] is a lexical date prefix (`YYYY`, `YYYY-MM`, `YYYY-MM-DD`)
//! that denotes the half-open interval covering exactly one unit of its
//! granularity. Intervals are measured in whole days, counted from the
//! proleptic Gregorian epoch used by `chrono`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Sentinel day number for an interval with no known start.
pub const OPEN_START: i64 = i64::MIN / 4;
/// Sentinel day number for an interval with no known end.
pub const OPEN_END: i64 = i64::MAX / 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseTimeError {
    #[error("empty time expression")]
    Empty,
    #[error("malformed time component `{token}` in `{text}`")]
    Malformed { text: String, token: String },
    #[error("too many components in `{0}`")]
    TooManyComponents(String),
    #[error("`{text}` is not a calendar date")]
    OutOfRange { text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Granularity {
    Year,
    Month,
    Day,
}

/// Half-open interval `[start, end)` over day numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub start: i64,
    pub end: i64,
}

impl Interval {
    /// Returns `None` unless `start < end`.
    pub fn new(start: i64, end: i64) -> Option<Self> {
        (start < end).then_some(Self { start, end })
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Smallest interval covering both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |d: i64, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if d <= OPEN_START {
                return f.write_str("-inf");
            }
            if d >= OPEN_END {
                return f.write_str("+inf");
            }
            match i32::try_from(d).ok().and_then(NaiveDate::from_num_days_from_ce_opt) {
                Some(date) => write!(f, "{}", date.format("%Y-%m-%d")),
                None => write!(f, "{d}"),
            }
        };
        f.write_str("[")?;
        show(self.start, f)?;
        f.write_str(", ")?;
        show(self.end, f)?;
        f.write_str(")")
    }
}

fn day_number(date: NaiveDate) -> i64 {
    i64::from(date.num_days_from_ce())
}

/// A date prefix with its granularity. Equality and ordering ignore the
/// original spelling: `"1960-10-7"` equals `"1960-10-07"`.
#[derive(Debug, Clone)]
pub struct TimeValue {
    text: String,
    granularity: Granularity,
    start: NaiveDate,
    end: NaiveDate,
}

impl TimeValue {
    pub fn parse(text: &str) -> Result<Self, ParseTimeError> {
        parse_time_value(text)
    }

    pub fn year(year: i32) -> Self {
        parse_time_value(&format!("{year:04}")).expect("valid year")
    }

    /// The lexical form this value was parsed from.
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    /// Zero-padded ISO-8601 prefix.
    pub fn canonical(&self) -> String {
        match self.granularity {
            Granularity::Year => format!("{:04}", self.start.year()),
            Granularity::Month => format!("{:04}-{:02}", self.start.year(), self.start.month()),
            Granularity::Day => self.start.format("%Y-%m-%d").to_string(),
        }
    }

    pub fn interval(&self) -> Interval {
        Interval {
            start: day_number(self.start),
            end: day_number(self.end),
        }
    }

    fn key(&self) -> (NaiveDate, Granularity) {
        (self.start, self.granularity)
    }
}

impl PartialEq for TimeValue {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for TimeValue {}

impl Hash for TimeValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for TimeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl FromStr for TimeValue {
    type Err = ParseTimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_time_value(s)
    }
}

impl Serialize for TimeValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical())
    }
}

impl<'de> Deserialize<'de> for TimeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_time_value(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses `YYYY`, `YYYY-MM` or `YYYY-MM-DD`; month and day may be unpadded.
pub fn parse_time_value(text: &str) -> Result<TimeValue, ParseTimeError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ParseTimeError::Empty);
    }
    let parts: Vec<&str> = trimmed.split('-').collect();
    if parts.len() > 3 {
        return Err(ParseTimeError::TooManyComponents(trimmed.to_string()));
    }
    let malformed = |token: &str| ParseTimeError::Malformed {
        text: trimmed.to_string(),
        token: token.to_string(),
    };
    let mut numbers = [0u32; 3];
    for (i, part) in parts.iter().enumerate() {
        let max_len = if i == 0 { 4 } else { 2 };
        if part.is_empty() || part.len() > max_len || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed(part));
        }
        numbers[i] = part.parse().map_err(|_| malformed(part))?;
    }
    let out_of_range = || ParseTimeError::OutOfRange {
        text: trimmed.to_string(),
    };
    let year = numbers[0] as i32;
    let (granularity, start, end) = match parts.len() {
        1 => {
            let start = NaiveDate::from_ymd_opt(year, 1, 1).ok_or_else(out_of_range)?;
            let end = NaiveDate::from_ymd_opt(year + 1, 1, 1).ok_or_else(out_of_range)?;
            (Granularity::Year, start, end)
        }
        2 => {
            let start = NaiveDate::from_ymd_opt(year, numbers[1], 1).ok_or_else(out_of_range)?;
            let end = start.checked_add_months(Months::new(1)).ok_or_else(out_of_range)?;
            (Granularity::Month, start, end)
        }
        _ => {
            let start =
                NaiveDate::from_ymd_opt(year, numbers[1], numbers[2]).ok_or_else(out_of_range)?;
            let end = start.succ_opt().ok_or_else(out_of_range)?;
            (Granularity::Day, start, end)
        }
    };
    Ok(TimeValue {
        text: trimmed.to_string(),
        granularity,
        start,
        end,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AllenRelation {
    Before,
    After,
    Meets,
    MetBy,
    Overlaps,
    OverlappedBy,
    Starts,
    StartedBy,
    During,
    Contains,
    Finishes,
    FinishedBy,
    Equal,
}

impl AllenRelation {
    pub const ALL: [AllenRelation; 13] = [
        AllenRelation::Before,
        AllenRelation::After,
        AllenRelation::Meets,
        AllenRelation::MetBy,
        AllenRelation::Overlaps,
        AllenRelation::OverlappedBy,
        AllenRelation::Starts,
        AllenRelation::StartedBy,
        AllenRelation::During,
        AllenRelation::Contains,
        AllenRelation::Finishes,
        AllenRelation::FinishedBy,
        AllenRelation::Equal,
    ];

    pub fn converse(self) -> AllenRelation {
        use AllenRelation::*;
        match self {
            Before => After,
            After => Before,
            Meets => MetBy,
            MetBy => Meets,
            Overlaps => OverlappedBy,
            OverlappedBy => Overlaps,
            Starts => StartedBy,
            StartedBy => Starts,
            During => Contains,
            Contains => During,
            Finishes => FinishedBy,
            FinishedBy => Finishes,
            Equal => Equal,
        }
    }
}

/// The unique Allen relation of `a` with respect to `b`.
pub fn allen_relation(a: &Interval, b: &Interval) -> AllenRelation {
    use AllenRelation::*;
    if a.end < b.start {
        return Before;
    }
    if b.end < a.start {
        return After;
    }
    if a.end == b.start {
        return Meets;
    }
    if b.end == a.start {
        return MetBy;
    }
    // The intervals share at least one point from here on.
    match (a.start.cmp(&b.start), a.end.cmp(&b.end)) {
        (Ordering::Equal, Ordering::Equal) => Equal,
        (Ordering::Equal, Ordering::Less) => Starts,
        (Ordering::Equal, Ordering::Greater) => StartedBy,
        (Ordering::Greater, Ordering::Equal) => Finishes,
        (Ordering::Less, Ordering::Equal) => FinishedBy,
        (Ordering::Greater, Ordering::Less) => During,
        (Ordering::Less, Ordering::Greater) => Contains,
        (Ordering::Less, Ordering::Less) => Overlaps,
        (Ordering::Greater, Ordering::Greater) => OverlappedBy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TimeMlRelType {
    Before,
    After,
    Includes,
    IsIncluded,
    During,
    Simultaneous,
    Iafter,
    Ibefore,
    Identity,
    Begins,
    Ends,
    BegunBy,
    EndedBy,
}

impl TimeMlRelType {
    pub const ALL: [TimeMlRelType; 13] = [
        TimeMlRelType::Before,
        TimeMlRelType::After,
        TimeMlRelType::Includes,
        TimeMlRelType::IsIncluded,
        TimeMlRelType::During,
        TimeMlRelType::Simultaneous,
        TimeMlRelType::Iafter,
        TimeMlRelType::Ibefore,
        TimeMlRelType::Identity,
        TimeMlRelType::Begins,
        TimeMlRelType::Ends,
        TimeMlRelType::BegunBy,
        TimeMlRelType::EndedBy,
    ];

    pub fn as_str(self) -> &'static str {
        use TimeMlRelType::*;
        match self {
            Before => "BEFORE",
            After => "AFTER",
            Includes => "INCLUDES",
            IsIncluded => "IS_INCLUDED",
            During => "DURING",
            Simultaneous => "SIMULTANEOUS",
            Iafter => "IAFTER",
            Ibefore => "IBEFORE",
            Identity => "IDENTITY",
            Begins => "BEGINS",
            Ends => "ENDS",
            BegunBy => "BEGUN_BY",
            EndedBy => "ENDED_BY",
        }
    }
}

impl fmt::Display for TimeMlRelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimeMlRelType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TimeMlRelType::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown TimeML relation type `{s}`"))
    }
}

/// Algebraic predicate used by temporal filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ComparisonPredicate {
    Equal,
    Before,
    After,
    Includes,
    IsIncluded,
    Overlaps,
}

impl ComparisonPredicate {
    pub const ALL: [ComparisonPredicate; 6] = [
        ComparisonPredicate::Equal,
        ComparisonPredicate::Before,
        ComparisonPredicate::After,
        ComparisonPredicate::Includes,
        ComparisonPredicate::IsIncluded,
        ComparisonPredicate::Overlaps,
    ];

    /// Allen relations `relation(reference, subject)` accepted by this predicate.
    pub fn accepts(self) -> &'static [AllenRelation] {
        use AllenRelation::*;
        match self {
            ComparisonPredicate::Equal => &[Equal],
            ComparisonPredicate::Before => &[Before, Meets],
            ComparisonPredicate::After => &[After, MetBy],
            ComparisonPredicate::Includes => &[Contains, StartedBy, FinishedBy, Equal],
            ComparisonPredicate::IsIncluded => &[During, Starts, Finishes, Equal],
            ComparisonPredicate::Overlaps => &[
                Overlaps,
                OverlappedBy,
                Starts,
                StartedBy,
                During,
                Contains,
                Finishes,
                FinishedBy,
                Equal,
            ],
        }
    }

    /// The predicate with its arguments swapped.
    pub fn converse(self) -> ComparisonPredicate {
        match self {
            ComparisonPredicate::Before => ComparisonPredicate::After,
            ComparisonPredicate::After => ComparisonPredicate::Before,
            ComparisonPredicate::Includes => ComparisonPredicate::IsIncluded,
            ComparisonPredicate::IsIncluded => ComparisonPredicate::Includes,
            p => p,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ComparisonPredicate::Equal => "EQUAL",
            ComparisonPredicate::Before => "BEFORE",
            ComparisonPredicate::After => "AFTER",
            ComparisonPredicate::Includes => "INCLUDES",
            ComparisonPredicate::IsIncluded => "IS_INCLUDED",
            ComparisonPredicate::Overlaps => "OVERLAPS",
        }
    }
}

impl fmt::Display for ComparisonPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Interval form of [`satisfies`], also used for statement validity spans.
pub fn satisfies_interval(pred: ComparisonPredicate, reference: &Interval, subject: &Interval) -> bool {
    pred.accepts().contains(&allen_relation(reference, subject))
}

/// True iff `allen_relation(reference, subject)` is accepted by `pred`.
///
/// The reference sits on the left: `satisfies(INCLUDES, "1960", "1960-10-7")`
/// holds because the year contains the day.
pub fn satisfies(pred: ComparisonPredicate, reference: &TimeValue, subject: &TimeValue) -> bool {
    satisfies_interval(pred, &reference.interval(), &subject.interval())
}

pub fn normalize_reltype(r: TimeMlRelType) -> ComparisonPredicate {
    use TimeMlRelType::*;
    match r {
        Simultaneous => ComparisonPredicate::Overlaps,
        Includes | BegunBy | EndedBy => ComparisonPredicate::Includes,
        IsIncluded | During => ComparisonPredicate::IsIncluded,
        Before | Ibefore | Ends => ComparisonPredicate::Before,
        After | Iafter | Begins => ComparisonPredicate::After,
        Identity => ComparisonPredicate::Equal,
    }
}
