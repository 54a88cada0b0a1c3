//! Calendar dates and hour-resolution timestamps.
//!
//! Timestamps are naive wall-clock hours in a fixed offset: no time zones,
//! no DST transitions. Arithmetic is plain integer math on an hour counter,
//! so differences in whole hours are always exact. The calendar is proleptic
//! Gregorian.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SeriesError;

/// Day of week in the proleptic Gregorian calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weekday {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl Weekday {
    pub fn is_weekend(self) -> bool {
        matches!(self, Weekday::Saturday | Weekday::Sunday)
    }

    fn from_index(i: i64) -> Self {
        // index 0 = Monday
        match i.rem_euclid(7) {
            0 => Weekday::Monday,
            1 => Weekday::Tuesday,
            2 => Weekday::Wednesday,
            3 => Weekday::Thursday,
            4 => Weekday::Friday,
            5 => Weekday::Saturday,
            _ => Weekday::Sunday,
        }
    }
}

impl fmt::Display for Weekday {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Weekday::Monday => "Monday",
            Weekday::Tuesday => "Tuesday",
            Weekday::Wednesday => "Wednesday",
            Weekday::Thursday => "Thursday",
            Weekday::Friday => "Friday",
            Weekday::Saturday => "Saturday",
            Weekday::Sunday => "Sunday",
        };
        f.write_str(name)
    }
}

/// A calendar date, stored as whole days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date(i64);

impl Date {
    pub fn from_ymd(year: i64, month: u32, day: u32) -> Result<Self, SeriesError> {
        if !(1..=12).contains(&month) || day < 1 || day > days_in_month(year, month) {
            return Err(SeriesError::InvalidDate { year, month, day });
        }
        Ok(Date(days_from_civil(year, month, day)))
    }

    /// Days since 1970-01-01 (may be negative).
    pub fn day_number(self) -> i64 {
        self.0
    }

    pub fn from_day_number(days: i64) -> Self {
        Date(days)
    }

    pub fn year(self) -> i64 {
        civil_from_days(self.0).0
    }

    pub fn month(self) -> u32 {
        civil_from_days(self.0).1
    }

    pub fn day(self) -> u32 {
        civil_from_days(self.0).2
    }

    pub fn weekday(self) -> Weekday {
        // 1970-01-01 was a Thursday (index 3 counting Monday = 0).
        Weekday::from_index(self.0 + 3)
    }

    pub fn add_days(self, days: i64) -> Self {
        Date(self.0 + days)
    }

    pub fn days_since(self, other: Date) -> i64 {
        self.0 - other.0
    }

    /// The timestamp at the given hour of this date.
    pub fn at_hour(self, hour: u32) -> Result<Timestamp, SeriesError> {
        if hour > 23 {
            return Err(SeriesError::InvalidHour(hour));
        }
        Ok(Timestamp(self.0 * 24 + i64::from(hour)))
    }

    /// Midnight at the start of this date.
    pub fn midnight(self) -> Timestamp {
        Timestamp(self.0 * 24)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d) = civil_from_days(self.0);
        write!(f, "{y:04}-{m:02}-{d:02}")
    }
}

impl FromStr for Date {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SeriesError::DateParse(s.to_string());
        let mut parts = s.splitn(3, '-');
        let year: i64 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let month: u32 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let day: u32 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        Date::from_ymd(year, month, day).map_err(|_| bad())
    }
}

/// A wall-clock hour, stored as whole hours since 1970-01-01T00:00.
///
/// Text form is `YYYY-MM-DDTHH:00`, matching the CSV schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub fn from_ymdh(year: i64, month: u32, day: u32, hour: u32) -> Result<Self, SeriesError> {
        Date::from_ymd(year, month, day)?.at_hour(hour)
    }

    /// Hours since 1970-01-01T00:00 (may be negative).
    pub fn hour_number(self) -> i64 {
        self.0
    }

    pub fn date(self) -> Date {
        Date(self.0.div_euclid(24))
    }

    pub fn hour(self) -> u32 {
        self.0.rem_euclid(24) as u32
    }

    pub fn weekday(self) -> Weekday {
        self.date().weekday()
    }

    pub fn add_hours(self, hours: i64) -> Self {
        Timestamp(self.0 + hours)
    }

    pub fn add_days(self, days: i64) -> Self {
        Timestamp(self.0 + days * 24)
    }

    /// Exact difference `self - other` in whole hours.
    pub fn hours_since(self, other: Timestamp) -> i64 {
        self.0 - other.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}T{:02}:00", self.date(), self.hour())
    }
}

impl FromStr for Timestamp {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SeriesError::TimestampParse(s.to_string());
        let (date_part, time_part) = s.split_once('T').ok_or_else(bad)?;
        let date: Date = date_part.parse().map_err(|_| bad())?;
        // Minutes (and seconds, if present) must be zero: the grid is hourly.
        let mut fields = time_part.split(':');
        let hour: u32 = fields.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        for rest in fields {
            if rest.parse::<u32>() != Ok(0) {
                return Err(bad());
            }
        }
        date.at_hour(hour).map_err(|_| bad())
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(D::Error::custom)
            }
        }
    };
}

string_serde!(Date);
string_serde!(Timestamp);

fn is_leap_year(year: i64) -> bool {
    year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)
}

fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

// Civil-date conversions after Howard Hinnant's chrono-compatible algorithms;
// valid over the full i64 range we care about.
fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = i64::from((month + 9) % 12);
    let doy = (153 * mp + 2) / 5 + i64::from(day) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = (if mp < 10 { mp + 3 } else { mp - 9 }) as u32;
    (if month <= 2 { y + 1 } else { y }, month, day)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weekday_of_known_dates() {
        // Stay-at-home order date and its eve.
        assert_eq!(Date::from_ymd(2020, 3, 22).unwrap().weekday(), Weekday::Sunday);
        assert_eq!(Date::from_ymd(2020, 3, 21).unwrap().weekday(), Weekday::Saturday);
        assert_eq!(Date::from_ymd(2017, 1, 1).unwrap().weekday(), Weekday::Sunday);
        assert_eq!(Date::from_ymd(1970, 1, 1).unwrap().weekday(), Weekday::Thursday);
    }

    #[test]
    fn weekday_matches_civil_date_oracle() {
        use chrono::Datelike;
        // Sweep a few years around the study period against chrono.
        let start = Date::from_ymd(2016, 1, 1).unwrap();
        for offset in 0..2000 {
            let date = start.add_days(offset);
            let oracle = chrono::NaiveDate::from_ymd_opt(
                date.year() as i32,
                date.month(),
                date.day(),
            )
            .unwrap();
            let ours = match date.weekday() {
                Weekday::Monday => 0,
                Weekday::Tuesday => 1,
                Weekday::Wednesday => 2,
                Weekday::Thursday => 3,
                Weekday::Friday => 4,
                Weekday::Saturday => 5,
                Weekday::Sunday => 6,
            };
            assert_eq!(
                ours,
                oracle.weekday().num_days_from_monday(),
                "weekday mismatch at {date}"
            );
        }
    }

    #[test]
    fn civil_round_trip() {
        use chrono::Datelike;
        let start = Date::from_ymd(1999, 12, 25).unwrap();
        for offset in 0..10_000 {
            let date = start.add_days(offset);
            let (y, m, d) = (date.year(), date.month(), date.day());
            assert_eq!(Date::from_ymd(y, m, d).unwrap(), date);
            // Cross-check day numbering against chrono's epoch arithmetic.
            let oracle = chrono::NaiveDate::from_ymd_opt(y as i32, m, d).unwrap();
            let epoch = chrono::NaiveDate::from_ymd_opt(1970, 1, 1).unwrap();
            assert_eq!(
                date.day_number(),
                (oracle - epoch).num_days(),
                "day number mismatch at {y:04}-{m:02}-{d:02}"
            );
            let _ = oracle.ordinal();
        }
    }

    #[test]
    fn rejects_invalid_dates() {
        assert!(Date::from_ymd(2021, 2, 29).is_err());
        assert!(Date::from_ymd(2020, 2, 29).is_ok());
        assert!(Date::from_ymd(2020, 13, 1).is_err());
        assert!(Date::from_ymd(2020, 6, 31).is_err());
        assert!(Date::from_ymd(2020, 0, 1).is_err());
    }

    #[test]
    fn timestamp_arithmetic_is_exact() {
        let a = Timestamp::from_ymdh(2020, 3, 20, 0).unwrap();
        let b = Timestamp::from_ymdh(2020, 3, 22, 5).unwrap();
        assert_eq!(b.hours_since(a), 53);
        assert_eq!(a.add_hours(53), b);
        assert_eq!(b.hour(), 5);
        assert_eq!(b.date(), Date::from_ymd(2020, 3, 22).unwrap());
    }

    #[test]
    fn timestamp_text_round_trip() {
        let ts = Timestamp::from_ymdh(2020, 3, 22, 0).unwrap();
        assert_eq!(ts.to_string(), "2020-03-22T00:00");
        assert_eq!("2020-03-22T00:00".parse::<Timestamp>().unwrap(), ts);
        assert_eq!("2020-03-22T00:00:00".parse::<Timestamp>().unwrap(), ts);
        assert!("2020-03-22T00:30".parse::<Timestamp>().is_err());
        assert!("2020-03-22 00:00".parse::<Timestamp>().is_err());
        assert!("2020-03-22T24:00".parse::<Timestamp>().is_err());
    }

    #[test]
    fn hour_rejected_out_of_range() {
        let date = Date::from_ymd(2020, 1, 1).unwrap();
        assert!(date.at_hour(24).is_err());
        assert!(date.at_hour(23).is_ok());
    }

    #[test]
    fn serde_as_strings() {
        let ts = Timestamp::from_ymdh(2020, 3, 22, 7).unwrap();
        let json = serde_json::to_string(&ts).unwrap();
        assert_eq!(json, "\"2020-03-22T07:00\"");
        let back: Timestamp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ts);

        let d = Date::from_ymd(2020, 2, 29).unwrap();
        assert_eq!(serde_json::to_string(&d).unwrap(), "\"2020-02-29\"");
    }
}
