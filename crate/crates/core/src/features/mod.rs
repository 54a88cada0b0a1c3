//! Data preparation: the 24-hour weather shift, daily-to-hourly upsampling,
//! zero prefix fill, the pre/post stay-at-home split, weekend filtering,
//! supervised windowing, and z-score normalization.
//!
//! All operations are pure functions over immutable inputs.

mod norm;
mod windows;

pub use norm::{apply_norm, fit_norm, invert_target, NormStats};
pub use windows::{build_windows, WindowSet, INPUT_HOURS, TARGET_HOURS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{
    align, AlignedDataset, DailySeries, HourlySeries, SeriesError, Timestamp,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("series {name:?} has {len} hours, need more than {min}")]
    SeriesTooShort { name: String, len: usize, min: usize },
    #[error("daily series {0:?} is empty")]
    EmptyDaily(String),
    #[error("fill start {full_start} is after series start {series_start}")]
    FillStartTooLate {
        full_start: Timestamp,
        series_start: Timestamp,
    },
    #[error("invalid split config: {}", .0.join("; "))]
    InvalidSplit(Vec<String>),
    #[error("split boundary {boundary} outside data range [{start}, {end})")]
    BoundaryOutOfRange {
        boundary: Timestamp,
        start: Timestamp,
        end: Timestamp,
    },
    #[error("test window ends {needed} but data ends {available}")]
    HorizonExceedsData {
        needed: Timestamp,
        available: Timestamp,
    },
    #[error("no supervised samples could be built (need {INPUT_HOURS}h of history plus a complete target day)")]
    NoSamples,
    #[error("window sets are incompatible: {0}")]
    IncompatibleWindows(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Where the regime boundary sits and how far past it forecasts run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    /// First hour of the post period.
    pub stay_at_home: Timestamp,
    /// Earliest hour eligible for training data.
    pub train_start: Timestamp,
    /// Length of the post (test) period in weeks.
    pub horizon_weeks: u32,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            stay_at_home: Timestamp::from_ymdh(2020, 3, 22, 0).expect("fixed default"),
            train_start: Timestamp::from_ymdh(2017, 1, 1, 0).expect("fixed default"),
            horizon_weeks: 10,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let mut problems = Vec::new();
        if self.train_start >= self.stay_at_home {
            problems.push(format!(
                "train_start {} must precede stay_at_home {}",
                self.train_start, self.stay_at_home
            ));
        }
        if self.horizon_weeks < 1 {
            problems.push("horizon_weeks must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(FeatureError::InvalidSplit(problems))
        }
    }

    /// One past the last forecast hour.
    pub fn post_end(&self) -> Timestamp {
        self.stay_at_home.add_hours(i64::from(self.horizon_weeks) * 168)
    }

    pub fn horizon_days(&self) -> u32 {
        self.horizon_weeks * 7
    }
}

/// Mimic day-ahead weather forecasts: the value seen at hour `h` is the
/// actual weather of `h − 24h`. The output begins 24 hours after the input
/// and is clipped to the observed range, so it is 24 values shorter.
pub fn shift_weather(w: &HourlySeries) -> Result<HourlySeries, FeatureError> {
    if w.len() <= 24 {
        return Err(FeatureError::SeriesTooShort {
            name: w.name().to_string(),
            len: w.len(),
            min: 24,
        });
    }
    let values = w.values()[..w.len() - 24].to_vec();
    Ok(HourlySeries::new(w.name(), w.start().add_hours(24), values)?)
}

/// Repeat each daily value 24 times to simulate hourly measurements.
pub fn upsample_daily(d: &DailySeries) -> Result<HourlySeries, FeatureError> {
    if d.is_empty() {
        return Err(FeatureError::EmptyDaily(d.name().to_string()));
    }
    let mut values = Vec::with_capacity(d.len() * 24);
    for &v in d.values() {
        for _ in 0..24 {
            values.push(v);
        }
    }
    Ok(HourlySeries::new(d.name(), d.start_date().midnight(), values)?)
}

/// Extend a series backward to `full_start` with exact zeros.
pub fn zero_fill_prefix(
    s: &HourlySeries,
    full_start: Timestamp,
) -> Result<HourlySeries, FeatureError> {
    if full_start > s.start() {
        return Err(FeatureError::FillStartTooLate {
            full_start,
            series_start: s.start(),
        });
    }
    let pad = s.start().hours_since(full_start) as usize;
    let mut values = vec![0.0; pad];
    values.extend_from_slice(s.values());
    Ok(HourlySeries::new(s.name(), full_start, values)?)
}

/// Split into the pre period `[max(start, train_start), stay_at_home)` and
/// the post period `[stay_at_home, stay_at_home + horizon_weeks · 168h)`.
pub fn split_pre_post(
    ds: &AlignedDataset,
    cfg: &SplitConfig,
) -> Result<(AlignedDataset, AlignedDataset), FeatureError> {
    cfg.validate()?;
    let (Some(&start), Some(&last)) = (ds.index().first(), ds.index().last()) else {
        return Err(FeatureError::BoundaryOutOfRange {
            boundary: cfg.stay_at_home,
            start: cfg.stay_at_home,
            end: cfg.stay_at_home,
        });
    };
    let end = last.add_hours(1);
    if cfg.stay_at_home < start || cfg.stay_at_home >= end {
        return Err(FeatureError::BoundaryOutOfRange {
            boundary: cfg.stay_at_home,
            start,
            end,
        });
    }
    let post_end = cfg.post_end();
    if post_end > end {
        return Err(FeatureError::HorizonExceedsData {
            needed: post_end,
            available: end,
        });
    }
    let pre_start = start.max(cfg.train_start);
    let pre = ds.restrict(pre_start, cfg.stay_at_home);
    let post = ds.restrict(cfg.stay_at_home, post_end);
    Ok((pre, post))
}

/// Rows falling on Saturdays and Sundays, in original order. The result keeps
/// a strictly increasing index but generally has gaps between weekends;
/// window construction handles those.
pub fn filter_weekends(ds: &AlignedDataset) -> AlignedDataset {
    ds.select_rows(|ts| ts.weekday().is_weekend())
}

/// Exogenous channel groups that can accompany the lagged load history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Weather,
    Covid,
    Mobility,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Weather => "weather",
            FeatureKind::Covid => "covid",
            FeatureKind::Mobility => "mobility",
        }
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parsed source channels before preparation.
#[derive(Debug, Clone)]
pub struct RawSources {
    pub load: HourlySeries,
    pub weather: Vec<HourlySeries>,
    pub covid: Vec<DailySeries>,
    pub mobility: Vec<DailySeries>,
}

/// Apply the preparation rules and join the selected channels on their
/// common range: weather shifted back 24h, daily channels repeated 24× and
/// zero-filled back to the load start when they begin later.
pub fn prepare_dataset(
    src: &RawSources,
    features: &[FeatureKind],
) -> Result<AlignedDataset, FeatureError> {
    let mut channels = vec![src.load.clone()];
    if features.contains(&FeatureKind::Weather) {
        for w in &src.weather {
            channels.push(shift_weather(w)?);
        }
    }
    if features.contains(&FeatureKind::Covid) {
        for c in &src.covid {
            channels.push(fill_daily(c, src.load.start())?);
        }
    }
    if features.contains(&FeatureKind::Mobility) {
        for m in &src.mobility {
            channels.push(fill_daily(m, src.load.start())?);
        }
    }
    Ok(align(&channels, src.load.name())?)
}

fn fill_daily(d: &DailySeries, load_start: Timestamp) -> Result<HourlySeries, FeatureError> {
    let hourly = upsample_daily(d)?;
    if load_start < hourly.start() {
        zero_fill_prefix(&hourly, load_start)
    } else {
        Ok(hourly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Date;

    fn ts(y: i64, m: u32, d: u32, h: u32) -> Timestamp {
        Timestamp::from_ymdh(y, m, d, h).unwrap()
    }

    fn hourly(name: &str, start: Timestamp, len: usize) -> HourlySeries {
        HourlySeries::new(name, start, (0..len).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn shift_weather_moves_values_forward_a_day() {
        let w = hourly("air_temp_c", ts(2020, 1, 1, 0), 72);
        let shifted = shift_weather(&w).unwrap();
        assert_eq!(shifted.len(), 48);
        assert_eq!(shifted.start(), ts(2020, 1, 2, 0));
        // Value seen at 2020-01-02T06 is the raw value of 2020-01-01T06.
        assert_eq!(
            shifted.value_at(ts(2020, 1, 2, 6)).unwrap(),
            w.value_at(ts(2020, 1, 1, 6)).unwrap()
        );
    }

    #[test]
    fn shift_weather_length_contract() {
        let w = hourly("air_temp_c", ts(2020, 1, 1, 0), 48);
        assert_eq!(shift_weather(&w).unwrap().len(), 24);
        assert!(shift_weather(&hourly("w", ts(2020, 1, 1, 0), 24)).is_err());
    }

    #[test]
    fn shift_weather_composes() {
        let w = hourly("air_temp_c", ts(2020, 1, 1, 0), 120);
        let twice = shift_weather(&shift_weather(&w).unwrap()).unwrap();
        for i in 0..twice.len() {
            let at = twice.start().add_hours(i as i64);
            assert_eq!(twice.value_at(at), w.value_at(at.add_hours(-48)));
        }
    }

    #[test]
    fn upsample_repeats_each_day() {
        let d = DailySeries::new("new_cases", Date::from_ymd(2020, 3, 1).unwrap(), vec![5.0]).unwrap();
        let h = upsample_daily(&d).unwrap();
        assert_eq!(h.len(), 24);
        assert!(h.values().iter().all(|&v| v == 5.0));

        let d2 = DailySeries::new("new_cases", Date::from_ymd(2020, 3, 1).unwrap(), vec![1.0, 2.0]).unwrap();
        let h2 = upsample_daily(&d2).unwrap();
        assert!(h2.values()[..24].iter().all(|&v| v == 1.0));
        assert!(h2.values()[24..].iter().all(|&v| v == 2.0));
    }

    #[test]
    fn upsample_conserves_scaled_sum() {
        let d = DailySeries::new(
            "new_cases",
            Date::from_ymd(2020, 3, 1).unwrap(),
            vec![3.0, 7.5, 0.25, 11.0],
        )
        .unwrap();
        let h = upsample_daily(&d).unwrap();
        let daily_sum: f64 = d.values().iter().sum();
        let hourly_sum: f64 = h.values().iter().sum();
        assert_eq!(hourly_sum, 24.0 * daily_sum);
    }

    #[test]
    fn zero_fill_day_count() {
        // Series starting Mar 1, filled back to Jan 1 of a leap year:
        // 60 days of zeros.
        let s = hourly("new_cases", ts(2020, 3, 1, 0), 48);
        let filled = zero_fill_prefix(&s, ts(2020, 1, 1, 0)).unwrap();
        let pad = Date::from_ymd(2020, 3, 1)
            .unwrap()
            .days_since(Date::from_ymd(2020, 1, 1).unwrap())
            * 24;
        assert_eq!(pad, 1440);
        assert_eq!(filled.len(), 1440 + 48);
        assert!(filled.values()[..1440].iter().all(|&v| v == 0.0));
        assert_eq!(&filled.values()[1440..], s.values());
    }

    #[test]
    fn zero_fill_identity_and_length() {
        let s = hourly("new_cases", ts(2020, 3, 1, 0), 30);
        let same = zero_fill_prefix(&s, s.start()).unwrap();
        assert_eq!(same, s);
        let filled = zero_fill_prefix(&s, ts(2020, 2, 28, 12)).unwrap();
        assert_eq!(
            filled.len() as i64,
            s.end().hours_since(ts(2020, 2, 28, 12))
        );
        assert!(zero_fill_prefix(&s, ts(2020, 3, 1, 1)).is_err());
    }

    #[test]
    fn split_partitions_at_boundary() {
        let load = hourly("load_mw", ts(2020, 3, 1, 0), 24 * 120);
        let ds = align(&[load], "load_mw").unwrap();
        let cfg = SplitConfig {
            train_start: ts(2020, 3, 1, 0),
            stay_at_home: ts(2020, 3, 22, 0),
            horizon_weeks: 10,
        };
        let (pre, post) = split_pre_post(&ds, &cfg).unwrap();
        assert_eq!(*pre.index().last().unwrap(), ts(2020, 3, 21, 23));
        assert_eq!(post.index()[0], ts(2020, 3, 22, 0));
        assert_eq!(post.n_rows(), 1680);
        // Partition: no overlap, and together they cover [start, post_end).
        assert_eq!(pre.n_rows() + post.n_rows(), 21 * 24 + 1680);
    }

    #[test]
    fn split_respects_train_start() {
        let load = hourly("load_mw", ts(2020, 2, 1, 0), 24 * 150);
        let ds = align(&[load], "load_mw").unwrap();
        let cfg = SplitConfig {
            train_start: ts(2020, 3, 1, 0),
            stay_at_home: ts(2020, 3, 22, 0),
            horizon_weeks: 10,
        };
        let (pre, _) = split_pre_post(&ds, &cfg).unwrap();
        assert_eq!(pre.index()[0], ts(2020, 3, 1, 0));
    }

    #[test]
    fn split_errors_state_available_end() {
        let load = hourly("load_mw", ts(2020, 3, 1, 0), 24 * 60);
        let ds = align(&[load], "load_mw").unwrap();
        let cfg = SplitConfig {
            train_start: ts(2020, 3, 1, 0),
            stay_at_home: ts(2020, 3, 22, 0),
            horizon_weeks: 10,
        };
        let err = split_pre_post(&ds, &cfg).unwrap_err();
        assert!(err.to_string().contains("2020-04-30T00:00"), "{err}");

        let bad = SplitConfig {
            stay_at_home: ts(2021, 1, 1, 0),
            ..cfg
        };
        assert!(matches!(
            split_pre_post(&ds, &bad).unwrap_err(),
            FeatureError::BoundaryOutOfRange { .. }
        ));
    }

    #[test]
    fn weekend_filter_keeps_48_rows_per_week() {
        // 2020-03-09 is a Monday; one full week has exactly Sat+Sun = 48 rows.
        let load = hourly("load_mw", ts(2020, 3, 9, 0), 24 * 7);
        let ds = align(&[load], "load_mw").unwrap();
        let weekends = filter_weekends(&ds);
        assert_eq!(weekends.n_rows(), 48);
        assert_eq!(weekends.index()[0], ts(2020, 3, 14, 0));
        // Saturday 10:00 retained, Monday 10:00 dropped.
        assert!(weekends.row_of(ts(2020, 3, 14, 10)).is_some());
        assert!(weekends.row_of(ts(2020, 3, 9, 10)).is_none());
    }

    #[test]
    fn weekend_filter_idempotent_and_empty_on_weekdays() {
        let load = hourly("load_mw", ts(2020, 3, 9, 0), 24 * 5);
        let ds = align(&[load], "load_mw").unwrap();
        assert_eq!(filter_weekends(&ds).n_rows(), 0);

        let week = align(&[hourly("load_mw", ts(2020, 3, 9, 0), 24 * 14)], "load_mw").unwrap();
        let once = filter_weekends(&week);
        let twice = filter_weekends(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn prepare_joins_selected_channels() {
        let start = ts(2020, 1, 1, 0);
        let n = 24 * 40;
        let load = hourly("load_mw", start, n);
        let temp = hourly("air_temp_c", start, n);
        let covid = DailySeries::new(
            "new_cases",
            Date::from_ymd(2020, 1, 20).unwrap(),
            vec![10.0; 21],
        )
        .unwrap();
        let src = RawSources {
            load,
            weather: vec![temp],
            covid: vec![covid],
            mobility: vec![],
        };
        let ds = prepare_dataset(&src, &[FeatureKind::Weather, FeatureKind::Covid]).unwrap();
        // Weather shift trims the first day; covid is zero-filled to the load
        // start so the intersection is governed by the shift alone.
        assert_eq!(ds.index()[0], ts(2020, 1, 2, 0));
        assert_eq!(ds.n_channels(), 3);
        assert_eq!(ds.target().name(), "load_mw");
        let cases = ds.channel("new_cases").unwrap();
        let first_case_row = ds.row_of(ts(2020, 1, 20, 0)).unwrap();
        assert!(cases.values()[..first_case_row].iter().all(|&v| v == 0.0));
        assert!(cases.values()[first_case_row..].iter().all(|&v| v == 10.0));

        let load_only = prepare_dataset(&src, &[]).unwrap();
        assert_eq!(load_only.n_channels(), 1);
        assert_eq!(load_only.index()[0], start);
    }
}
