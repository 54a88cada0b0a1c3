//! Supervised sample construction: 168-hour input windows mapped to the 24
//! load values of the following day.

use std::collections::BTreeMap;

use crate::series::{AlignedDataset, Date, Timestamp};

use super::FeatureError;

/// Input window length: one week of hourly history.
pub const INPUT_HOURS: usize = 168;
/// Forecast horizon: the 24 hours of the target day.
pub const TARGET_HOURS: usize = 24;

/// Supervised samples. Each input is an `INPUT_HOURS × n_channels` matrix
/// stored row-major (hour-major), each target the day's `TARGET_HOURS` load
/// values in MW (or normalized units after `apply_norm`).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    channel_names: Vec<String>,
    target_channel: usize,
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    target_dates: Vec<Date>,
    last_input_ts: Vec<Timestamp>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.channel_names.len()
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    /// Column index of the load channel inside each input matrix.
    pub fn target_channel(&self) -> usize {
        self.target_channel
    }

    /// Flat `INPUT_HOURS × n_channels` input matrix of sample `i`.
    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i]
    }

    pub fn target_date(&self, i: usize) -> Date {
        self.target_dates[i]
    }

    /// Timestamp of the newest hour feeding sample `i`.
    pub fn last_input_ts(&self, i: usize) -> Timestamp {
        self.last_input_ts[i]
    }

    pub fn target_dates(&self) -> &[Date] {
        &self.target_dates
    }

    /// Append the samples of `other`, which must describe the same channels.
    pub fn concat(mut self, other: WindowSet) -> Result<WindowSet, FeatureError> {
        if self.channel_names != other.channel_names
            || self.target_channel != other.target_channel
        {
            return Err(FeatureError::IncompatibleWindows(format!(
                "channels {:?} vs {:?}",
                self.channel_names, other.channel_names
            )));
        }
        self.inputs.extend(other.inputs);
        self.targets.extend(other.targets);
        self.target_dates.extend(other.target_dates);
        self.last_input_ts.extend(other.last_input_ts);
        Ok(self)
    }

    /// Samples `[from, to)` in stored (chronological) order.
    pub fn slice_samples(&self, from: usize, to: usize) -> WindowSet {
        WindowSet {
            channel_names: self.channel_names.clone(),
            target_channel: self.target_channel,
            inputs: self.inputs[from..to].to_vec(),
            targets: self.targets[from..to].to_vec(),
            target_dates: self.target_dates[from..to].to_vec(),
            last_input_ts: self.last_input_ts[from..to].to_vec(),
        }
    }

    /// Samples whose target day satisfies the predicate.
    pub fn filter_by_date(&self, keep: impl Fn(Date) -> bool) -> WindowSet {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(self.target_dates[i])).collect();
        WindowSet {
            channel_names: self.channel_names.clone(),
            target_channel: self.target_channel,
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i].clone()).collect(),
            target_dates: idx.iter().map(|&i| self.target_dates[i]).collect(),
            last_input_ts: idx.iter().map(|&i| self.last_input_ts[i]).collect(),
        }
    }

    pub(crate) fn from_parts(
        channel_names: Vec<String>,
        target_channel: usize,
        inputs: Vec<Vec<f64>>,
        targets: Vec<Vec<f64>>,
        target_dates: Vec<Date>,
        last_input_ts: Vec<Timestamp>,
    ) -> WindowSet {
        WindowSet {
            channel_names,
            target_channel,
            inputs,
            targets,
            target_dates,
            last_input_ts,
        }
    }

    pub(crate) fn clone_shape(&self) -> (Vec<String>, usize) {
        (self.channel_names.clone(), self.target_channel)
    }
}

/// Build one sample per calendar day with complete data.
///
/// With `weekend_pairing` off, the input is the 168 hours immediately
/// preceding the target day; every hour must be present in `ds`. With it on
/// (for weekend-only training data), targets are weekend days and the input
/// is the pseudo-week formed by the 7 most recent complete weekend days
/// before the target, concatenated chronologically.
///
/// Days with insufficient history are skipped; an empty result is an error.
pub fn build_windows(ds: &AlignedDataset, weekend_pairing: bool) -> Result<WindowSet, FeatureError> {
    let n_channels = ds.n_channels();
    let target_channel = ds.target_position();

    // Group rows by calendar day and keep only complete days.
    let mut by_day: BTreeMap<Date, Vec<usize>> = BTreeMap::new();
    for (row, &ts) in ds.index().iter().enumerate() {
        by_day.entry(ts.date()).or_default().push(row);
    }
    let complete: Vec<(Date, Vec<usize>)> = by_day
        .into_iter()
        .filter(|(_, rows)| rows.len() == TARGET_HOURS)
        .collect();

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    let mut target_dates = Vec::new();
    let mut last_input_ts = Vec::new();

    let push_sample = |inputs: &mut Vec<Vec<f64>>,
                       targets: &mut Vec<Vec<f64>>,
                       target_dates: &mut Vec<Date>,
                       last_input_ts: &mut Vec<Timestamp>,
                       input_rows: &[usize],
                       day: &(Date, Vec<usize>)| {
        let mut input = Vec::with_capacity(INPUT_HOURS * n_channels);
        for &row in input_rows {
            for c in ds.channels() {
                input.push(c.values()[row]);
            }
        }
        let target_values = ds.target().values();
        targets.push(day.1.iter().map(|&row| target_values[row]).collect());
        target_dates.push(day.0);
        last_input_ts.push(ds.index()[*input_rows.last().expect("168 rows")]);
        inputs.push(input);
    };

    if weekend_pairing {
        let weekend_days: Vec<&(Date, Vec<usize>)> = complete
            .iter()
            .filter(|(date, _)| date.weekday().is_weekend())
            .collect();
        for (pos, day) in weekend_days.iter().enumerate() {
            if pos < 7 {
                continue;
            }
            let input_rows: Vec<usize> = weekend_days[pos - 7..pos]
                .iter()
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            push_sample(
                &mut inputs,
                &mut targets,
                &mut target_dates,
                &mut last_input_ts,
                &input_rows,
                day,
            );
        }
    } else {
        for day in &complete {
            let midnight = day.0.midnight();
            let window: Option<Vec<usize>> = (0..INPUT_HOURS as i64)
                .map(|h| ds.row_of(midnight.add_hours(h - INPUT_HOURS as i64)))
                .collect();
            let Some(input_rows) = window else {
                continue; // insufficient or gapped history: skip, not an error
            };
            push_sample(
                &mut inputs,
                &mut targets,
                &mut target_dates,
                &mut last_input_ts,
                &input_rows,
                day,
            );
        }
    }

    if inputs.is_empty() {
        return Err(FeatureError::NoSamples);
    }
    Ok(WindowSet {
        channel_names: ds.channels().iter().map(|c| c.name().to_string()).collect(),
        target_channel,
        inputs,
        targets,
        target_dates,
        last_input_ts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::filter_weekends;
    use crate::series::{align, HourlySeries};

    fn ts(y: i64, m: u32, d: u32, h: u32) -> Timestamp {
        Timestamp::from_ymdh(y, m, d, h).unwrap()
    }

    fn dataset(start: Timestamp, days: usize) -> AlignedDataset {
        let load =
            HourlySeries::new("load_mw", start, (0..days * 24).map(|i| i as f64).collect())
                .unwrap();
        let temp = HourlySeries::new(
            "air_temp_c",
            start,
            (0..days * 24).map(|i| (i as f64) * 0.5).collect(),
        )
        .unwrap();
        align(&[load, temp], "load_mw").unwrap()
    }

    #[test]
    fn eight_days_one_sample() {
        let ds = dataset(ts(2020, 3, 2, 0), 8);
        let ws = build_windows(&ds, false).unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!(ws.target_date(0), ts(2020, 3, 9, 0).date());
        // Target is day 8's load values, input ends the hour before.
        assert_eq!(ws.target(0)[0], (7 * 24) as f64);
        assert_eq!(ws.last_input_ts(0), ts(2020, 3, 8, 23));
    }

    #[test]
    fn nine_days_two_samples() {
        let ds = dataset(ts(2020, 3, 2, 0), 9);
        let ws = build_windows(&ds, false).unwrap();
        assert_eq!(ws.len(), 2);
    }

    #[test]
    fn input_layout_is_hour_major() {
        let ds = dataset(ts(2020, 3, 2, 0), 8);
        let ws = build_windows(&ds, false).unwrap();
        assert_eq!(ws.n_channels(), 2);
        assert_eq!(ws.target_channel(), 0);
        let input = ws.input(0);
        assert_eq!(input.len(), INPUT_HOURS * 2);
        // First input hour: load 0, temp 0; second hour: load 1, temp 0.5.
        assert_eq!(&input[..4], &[0.0, 0.0, 1.0, 0.5]);
    }

    #[test]
    fn no_leakage_inputs_precede_targets() {
        let ds = dataset(ts(2020, 3, 2, 0), 12);
        let ws = build_windows(&ds, false).unwrap();
        for i in 0..ws.len() {
            assert!(ws.last_input_ts(i) < ws.target_date(i).midnight());
        }
    }

    #[test]
    fn weekend_pairing_counts() {
        // 2020-01-06 is a Monday; 8 full weeks contain 16 weekend days.
        let ds = dataset(ts(2020, 1, 6, 0), 56);
        let weekends = filter_weekends(&ds);
        let ws = build_windows(&weekends, true).unwrap();
        assert_eq!(ws.len(), 16 - 7);
        // Every target is a weekend day.
        for i in 0..ws.len() {
            assert!(ws.target_date(i).weekday().is_weekend());
        }
    }

    #[test]
    fn weekend_pairing_pseudo_week_is_chronological() {
        let ds = dataset(ts(2020, 1, 6, 0), 70);
        let weekends = filter_weekends(&ds);
        let ws = build_windows(&weekends, true).unwrap();
        // The load channel of each pseudo-week must be strictly increasing
        // here because the underlying series is a global ramp.
        let input = ws.input(0);
        let load_col: Vec<f64> = (0..INPUT_HOURS).map(|h| input[h * 2]).collect();
        assert!(load_col.windows(2).all(|w| w[0] < w[1]));
        assert!(ws.last_input_ts(0) < ws.target_date(0).midnight());
    }

    #[test]
    fn gapped_history_skipped_without_pairing() {
        // Weekend-only rows cannot supply 168 contiguous hours.
        let ds = dataset(ts(2020, 1, 6, 0), 56);
        let weekends = filter_weekends(&ds);
        assert!(matches!(
            build_windows(&weekends, false).unwrap_err(),
            FeatureError::NoSamples
        ));
    }

    #[test]
    fn too_few_days_is_an_error() {
        let ds = dataset(ts(2020, 3, 2, 0), 7);
        assert!(matches!(
            build_windows(&ds, false).unwrap_err(),
            FeatureError::NoSamples
        ));
    }

    #[test]
    fn concat_requires_matching_channels() {
        let a = build_windows(&dataset(ts(2020, 3, 2, 0), 8), false).unwrap();
        let b = build_windows(&dataset(ts(2020, 5, 4, 0), 9), false).unwrap();
        let joined = a.clone().concat(b).unwrap();
        assert_eq!(joined.len(), 3);

        let other = align(
            &[HourlySeries::new("load_mw", ts(2020, 3, 2, 0), vec![1.0; 8 * 24]).unwrap()],
            "load_mw",
        )
        .unwrap();
        let mismatched = build_windows(&other, false).unwrap();
        assert!(a.concat(mismatched).is_err());
    }
}
