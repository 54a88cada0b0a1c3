//! The three experiments as reproducible procedures.
//!
//! - **Benchmark**: train once on the pre period (load + weather), forecast
//!   every post-period day from its trailing week of actuals.
//! - **Weekend**: same forecasts, but trained only on pre-period weekend
//!   pseudo-weeks, mimicking the post-shift demand pattern.
//! - **Rolling**: retrain weekly. The model for week `τ+1` sees weekend
//!   pseudo-weeks plus every completed post-period day before the cutoff
//!   `stay_at_home + 7τ` days, and its forecasts use no data at or after the
//!   cutoff: the load history beyond it comes from the model's own chained
//!   day-ahead predictions, exogenous channels from their values one week
//!   earlier. Week 1 falls back to the weekend-trained model and is flagged
//!   feature-blind.
//!
//! A scenario run is a pure function of (config, sources): training,
//! initialization, and batch order all derive from the configured seed.

mod metrics;
mod report;

pub use metrics::{day_actuals, mape, mape_at, seasonal_naive};
pub use report::{
    assemble_report, DayRecord, ReportMeta, ScenarioReport, REPORT_SCHEMA_VERSION,
};

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::{
    build_windows, filter_weekends, prepare_dataset, split_pre_post, FeatureError, FeatureKind,
    RawSources, SplitConfig, WindowSet, INPUT_HOURS,
};
use crate::neural::{predict_mw, train, Architecture, ModelParameters, NeuralError, TrainConfig};
use crate::rng::derive;
use crate::series::{AlignedDataset, Date, SeriesError, Timestamp};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("mape needs equal non-empty lengths, got {actual} actual vs {forecast} forecast")]
    MetricLength { actual: usize, forecast: usize },
    #[error("mape undefined: actual value is zero at {at}")]
    ZeroActual { at: String },
    #[error("seasonal-naive forecast needs day {needed}, which is not in range")]
    MissingHistory { needed: Date },
    #[error("day {date} lacks a complete {INPUT_HOURS}h input window or 24h of actuals")]
    IncompleteDay { date: Date },
    #[error("internal consistency: training sample touches {ts}, at or after cutoff {cutoff}")]
    Leakage { ts: Timestamp, cutoff: Timestamp },
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Benchmark,
    Weekend,
    Rolling,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] =
        [ScenarioKind::Benchmark, ScenarioKind::Weekend, ScenarioKind::Rolling];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Benchmark => "benchmark",
            ScenarioKind::Weekend => "weekend",
            ScenarioKind::Rolling => "rolling",
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "benchmark" => Ok(ScenarioKind::Benchmark),
            "weekend" => Ok(ScenarioKind::Weekend),
            "rolling" => Ok(ScenarioKind::Rolling),
            other => Err(ScenarioError::InvalidConfig(vec![format!(
                "unknown scenario kind {other:?} (valid: benchmark, weekend, rolling)"
            )])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub features: Vec<FeatureKind>,
    pub split: SplitConfig,
    pub train: TrainConfig,
    pub architecture: Architecture,
}

impl ScenarioConfig {
    /// Normalize the feature list and check every invariant, reporting all
    /// violations at once.
    pub fn validate(&mut self) -> Result<(), ScenarioError> {
        self.features.sort();
        self.features.dedup();
        let mut problems = Vec::new();
        let non_weather = self
            .features
            .iter()
            .any(|f| matches!(f, FeatureKind::Covid | FeatureKind::Mobility));
        match self.kind {
            ScenarioKind::Benchmark => {
                if self.features != [FeatureKind::Weather] {
                    problems.push(format!(
                        "benchmark uses exactly the weather feature set, got {:?}",
                        self.features
                    ));
                }
            }
            ScenarioKind::Weekend => {
                if non_weather {
                    problems.push(
                        "covid/mobility features require the rolling scenario \
                         (they are empty before the shift)"
                            .to_string(),
                    );
                }
            }
            ScenarioKind::Rolling => {}
        }
        if let Err(e) = self.split.validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.train.validate() {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::InvalidConfig(problems))
        }
    }

    /// Hex SHA-256 over the canonical JSON form of this config.
    pub fn fingerprint(&self) -> String {
        let body = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(body.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

/// Run whichever scenario the config names.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    sources: &RawSources,
) -> Result<ScenarioReport, ScenarioError> {
    match cfg.kind {
        ScenarioKind::Benchmark => run_benchmark(cfg, sources),
        ScenarioKind::Weekend => run_weekend(cfg, sources),
        ScenarioKind::Rolling => run_rolling(cfg, sources),
    }
}

/// Single training on all pre-period windows, then 70 trailing-window
/// day-ahead forecasts with no retraining.
pub fn run_benchmark(
    cfg: &ScenarioConfig,
    sources: &RawSources,
) -> Result<ScenarioReport, ScenarioError> {
    single_training_run(cfg, sources, false, "benchmark")
}

/// Like the benchmark but trained on weekend pseudo-weeks only.
pub fn run_weekend(
    cfg: &ScenarioConfig,
    sources: &RawSources,
) -> Result<ScenarioReport, ScenarioError> {
    single_training_run(cfg, sources, true, "weekend")
}

/// The benchmark procedure applied entirely inside the pre period: the
/// boundary moves back by the forecast horizon, so the model is scored on
/// the last pre-period weeks under the ordinary regime.
pub fn run_pre_self_test(
    cfg: &ScenarioConfig,
    sources: &RawSources,
) -> Result<ScenarioReport, ScenarioError> {
    let mut shifted = cfg.clone();
    shifted.split.stay_at_home = cfg
        .split
        .stay_at_home
        .add_hours(-(i64::from(cfg.split.horizon_weeks) * 168));
    single_training_run(&shifted, sources, false, "pre-self-test")
}

fn single_training_run(
    cfg: &ScenarioConfig,
    sources: &RawSources,
    weekend_training: bool,
    kind_label: &str,
) -> Result<ScenarioReport, ScenarioError> {
    let mut cfg = cfg.clone();
    cfg.validate()?;
    let ds = prepare_dataset(sources, &cfg.features)?;
    let (pre, _post) = split_pre_post(&ds, &cfg.split)?;
    let windows = if weekend_training {
        build_windows(&filter_weekends(&pre), true)?
    } else {
        build_windows(&pre, false)?
    };
    let (model, _trace) = train(cfg.architecture, &windows, &cfg.train)?;

    let start = cfg.split.stay_at_home.date();
    let days = (0..cfg.split.horizon_days())
        .map(|i| forecast_from_actuals(&ds, &model, start.add_days(i64::from(i))))
        .collect::<Result<Vec<_>, _>>()?;

    assemble_report(
        ReportMeta {
            kind: kind_label.to_string(),
            architecture: cfg.architecture,
            features: cfg.features.clone(),
            seed: cfg.train.seed,
            config_fingerprint: cfg.fingerprint(),
            week1_feature_blind: false,
        },
        days,
    )
}

/// Training cutoff of rolling week index `tau`: the model that forecasts
/// week `tau + 1` sees only data strictly before this hour.
pub fn rolling_cutoff(split: &SplitConfig, tau: u32) -> Timestamp {
    split.stay_at_home.add_days(i64::from(tau) * 7)
}

/// Weekly retraining. Forecasts for week `τ+1` are a pure function of data
/// strictly before `cutoff(τ)`; see the module docs for how the input
/// windows are completed beyond the cutoff.
pub fn run_rolling(
    cfg: &ScenarioConfig,
    sources: &RawSources,
) -> Result<ScenarioReport, ScenarioError> {
    let mut cfg = cfg.clone();
    cfg.validate()?;
    let ds = prepare_dataset(sources, &cfg.features)?;
    let (pre, _post) = split_pre_post(&ds, &cfg.split)?;
    let weekend_windows = build_windows(&filter_weekends(&pre), true)?;
    let ds_start = *ds.index().first().expect("non-empty dataset");
    let stay_at_home = cfg.split.stay_at_home;

    let mut days = Vec::new();
    for week in 0..cfg.split.horizon_weeks {
        let cutoff = rolling_cutoff(&cfg.split, week);
        let windows = if week == 0 {
            weekend_windows.clone()
        } else {
            let visible = ds.restrict(ds_start, cutoff);
            let post_windows =
                build_windows(&visible, false)?.filter_by_date(|d| d >= stay_at_home.date());
            weekend_windows.clone().concat(post_windows)?
        };
        assert_no_leakage(&windows, cutoff)?;

        let train_cfg = TrainConfig {
            seed: derive(cfg.train.seed, 100 + u64::from(week)),
            ..cfg.train.clone()
        };
        let (model, _trace) = train(cfg.architecture, &windows, &train_cfg)?;
        days.extend(forecast_week_beyond_cutoff(&ds, &model, cutoff)?);
    }

    assemble_report(
        ReportMeta {
            kind: "rolling".to_string(),
            architecture: cfg.architecture,
            features: cfg.features.clone(),
            seed: cfg.train.seed,
            config_fingerprint: cfg.fingerprint(),
            week1_feature_blind: true,
        },
        days,
    )
}

/// Every training sample must end, inputs and target alike, before the
/// cutoff.
fn assert_no_leakage(windows: &WindowSet, cutoff: Timestamp) -> Result<(), ScenarioError> {
    for i in 0..windows.len() {
        let input_end = windows.last_input_ts(i);
        let target_end = windows.target_date(i).midnight().add_hours(24);
        if input_end >= cutoff {
            return Err(ScenarioError::Leakage {
                ts: input_end,
                cutoff,
            });
        }
        if target_end > cutoff {
            return Err(ScenarioError::Leakage {
                ts: target_end.add_hours(-1),
                cutoff,
            });
        }
    }
    Ok(())
}

/// Day-ahead forecast from the trailing week of recorded values.
fn forecast_from_actuals(
    ds: &AlignedDataset,
    model: &ModelParameters,
    date: Date,
) -> Result<DayRecord, ScenarioError> {
    let midnight = date.midnight();
    let n_channels = ds.n_channels();
    let mut window = Vec::with_capacity(INPUT_HOURS * n_channels);
    for h in 0..INPUT_HOURS as i64 {
        let ts = midnight.add_hours(h - INPUT_HOURS as i64);
        for c in 0..n_channels {
            window.push(ds.value_at(c, ts).ok_or(ScenarioError::IncompleteDay { date })?);
        }
    }
    let forecast = predict_mw(model, &window)?;
    let actual = day_actuals(ds, date).ok_or(ScenarioError::IncompleteDay { date })?;
    Ok(DayRecord {
        date,
        actual,
        forecast,
    })
}

/// Forecast the 7 days starting at `cutoff` without touching any value at or
/// after it: load history beyond the cutoff is the chain of this week's own
/// predictions, exogenous channels repeat their value from one week earlier.
fn forecast_week_beyond_cutoff(
    ds: &AlignedDataset,
    model: &ModelParameters,
    cutoff: Timestamp,
) -> Result<Vec<DayRecord>, ScenarioError> {
    let n_channels = ds.n_channels();
    let target = ds.target_position();
    let mut chained: BTreeMap<Timestamp, f64> = BTreeMap::new();
    let mut out = Vec::with_capacity(7);
    for day_offset in 0..7 {
        let date = cutoff.date().add_days(day_offset);
        let midnight = date.midnight();
        let mut window = Vec::with_capacity(INPUT_HOURS * n_channels);
        for h in 0..INPUT_HOURS as i64 {
            let ts = midnight.add_hours(h - INPUT_HOURS as i64);
            for c in 0..n_channels {
                let v = if ts < cutoff {
                    ds.value_at(c, ts).ok_or(ScenarioError::IncompleteDay { date })?
                } else if c == target {
                    *chained
                        .get(&ts)
                        .expect("hours at/after the cutoff were predicted by an earlier day")
                } else {
                    ds.value_at(c, ts.add_hours(-168))
                        .ok_or(ScenarioError::IncompleteDay { date })?
                };
                window.push(v);
            }
        }
        let forecast = predict_mw(model, &window)?;
        for (h, &v) in forecast.iter().enumerate() {
            chained.insert(midnight.add_hours(h as i64), v);
        }
        let actual = day_actuals(ds, date).ok_or(ScenarioError::IncompleteDay { date })?;
        out.push(DayRecord {
            date,
            actual,
            forecast,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_synthetic, SynthConfig};

    fn synth_sources(n_days: u32, shift_day: u32, seed: u64) -> RawSources {
        let bundle = generate_synthetic(&SynthConfig {
            seed,
            n_days,
            base_mw: 15_000.0,
            weekday_amp: 6_000.0,
            weekend_amp: 3_500.0,
            shift_day,
            post_shift_weekday_amp: None,
            weather_coupling: 40.0,
            noise_sd: 120.0,
        })
        .unwrap();
        RawSources {
            load: bundle.load,
            weather: vec![bundle.weather],
            covid: vec![bundle.covid],
            mobility: vec![bundle.mobility],
        }
    }

    fn tiny_config(kind: ScenarioKind, horizon_weeks: u32) -> ScenarioConfig {
        ScenarioConfig {
            kind,
            features: vec![FeatureKind::Weather],
            split: SplitConfig {
                train_start: Timestamp::from_ymdh(2019, 1, 1, 0).unwrap(),
                horizon_weeks,
                ..SplitConfig::default()
            },
            train: TrainConfig {
                seed: 5,
                epochs: 3,
                batch_size: 16,
                learning_rate: 0.02,
                patience: 3,
                val_fraction: 0.15,
                hidden_fcdnn: vec![8, 8],
                hidden_rnn: 6,
            },
            architecture: Architecture::Fcdnn,
        }
    }

    #[test]
    fn benchmark_end_to_end_shape() {
        let sources = synth_sources(70, 56, 1);
        let cfg = tiny_config(ScenarioKind::Benchmark, 2);
        let report = run_benchmark(&cfg, &sources).unwrap();
        assert_eq!(report.kind, "benchmark");
        assert_eq!(report.daily_mape_pct.len(), 14);
        assert_eq!(report.weekly_mape_pct.len(), 2);
        assert!(report.overall_mape_pct.is_finite() && report.overall_mape_pct >= 0.0);
        assert_eq!(report.config_fingerprint.len(), 64);
        assert_eq!(report.days[0].date, Date::from_ymd(2020, 3, 22).unwrap());
        assert!(!report.week1_feature_blind);
        let recomputed = report.recompute_overall().unwrap();
        assert!((recomputed - report.overall_mape_pct).abs() < 1e-9);
    }

    #[test]
    fn weekend_end_to_end_shares_benchmark_day_set() {
        let sources = synth_sources(98, 84, 2);
        let cfg = tiny_config(ScenarioKind::Weekend, 2);
        let report = run_weekend(&cfg, &sources).unwrap();
        assert_eq!(report.kind, "weekend");
        assert_eq!(report.daily_mape_pct.len(), 14);

        // Paired comparison requires the identical test-period day set.
        let bench = run_benchmark(&tiny_config(ScenarioKind::Benchmark, 2), &sources).unwrap();
        let weekend_dates: Vec<Date> = report.days.iter().map(|d| d.date).collect();
        let bench_dates: Vec<Date> = bench.days.iter().map(|d| d.date).collect();
        assert_eq!(weekend_dates, bench_dates);
        for (a, b) in report.days.iter().zip(&bench.days) {
            assert_eq!(a.actual, b.actual);
        }
    }

    #[test]
    fn rolling_cutoff_schedule() {
        let split = SplitConfig::default();
        assert_eq!(rolling_cutoff(&split, 0), split.stay_at_home);
        assert_eq!(
            rolling_cutoff(&split, 4),
            Timestamp::from_ymdh(2020, 4, 19, 0).unwrap()
        );
    }

    #[test]
    fn rolling_end_to_end_flags_week_one() {
        let sources = synth_sources(98, 84, 3);
        let mut cfg = tiny_config(ScenarioKind::Rolling, 2);
        cfg.features = vec![FeatureKind::Weather, FeatureKind::Mobility];
        let report = run_rolling(&cfg, &sources).unwrap();
        assert!(report.week1_feature_blind);
        assert_eq!(report.daily_mape_pct.len(), 14);
        assert_eq!(report.features, vec![FeatureKind::Weather, FeatureKind::Mobility]);
    }

    #[test]
    fn runs_are_deterministic() {
        let sources = synth_sources(70, 56, 4);
        let cfg = tiny_config(ScenarioKind::Benchmark, 1);
        let a = run_scenario(&cfg, &sources).unwrap();
        let b = run_scenario(&cfg, &sources).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn pre_self_test_scores_inside_pre_period() {
        let sources = synth_sources(98, 84, 5);
        let cfg = tiny_config(ScenarioKind::Benchmark, 2);
        let report = run_pre_self_test(&cfg, &sources).unwrap();
        assert_eq!(report.kind, "pre-self-test");
        // Scored days end exactly at the real boundary.
        assert_eq!(
            report.days.last().unwrap().date,
            Date::from_ymd(2020, 3, 21).unwrap()
        );
    }

    #[test]
    fn config_rules_enforced() {
        let mut cfg = tiny_config(ScenarioKind::Benchmark, 2);
        cfg.features = vec![FeatureKind::Weather, FeatureKind::Covid];
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("weather"), "{err}");

        let mut cfg = tiny_config(ScenarioKind::Weekend, 2);
        cfg.features = vec![FeatureKind::Mobility];
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config(ScenarioKind::Rolling, 2);
        cfg.features = vec![FeatureKind::Covid, FeatureKind::Covid, FeatureKind::Weather];
        cfg.validate().unwrap();
        assert_eq!(cfg.features, vec![FeatureKind::Weather, FeatureKind::Covid]);
    }

    #[test]
    fn fingerprint_tracks_config_changes() {
        let cfg = tiny_config(ScenarioKind::Benchmark, 2);
        let mut other = cfg.clone();
        other.train.seed = 6;
        assert_ne!(cfg.fingerprint(), other.fingerprint());
        assert_eq!(cfg.fingerprint(), cfg.clone().fingerprint());
    }

    #[test]
    fn leakage_guard_fires_on_post_cutoff_samples() {
        let sources = synth_sources(70, 56, 6);
        let ds = prepare_dataset(&sources, &[]).unwrap();
        let windows = build_windows(&ds, false).unwrap();
        let cutoff = Timestamp::from_ymdh(2020, 3, 22, 0).unwrap();
        let err = assert_no_leakage(&windows, cutoff).unwrap_err();
        assert!(matches!(err, ScenarioError::Leakage { .. }), "{err}");

        let pre_only = windows.filter_by_date(|d| d < cutoff.date().add_days(-1));
        assert_no_leakage(&pre_only, cutoff).unwrap();
    }

    #[test]
    fn unknown_kind_parse_names_valid_kinds() {
        let err = "arima".parse::<ScenarioKind>().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("benchmark") && msg.contains("rolling"), "{msg}");
    }

    #[test]
    fn seasonal_naive_reacts_to_regime_shift() {
        // Noiseless generator: pre-shift weekday naive forecasts are exact,
        // the first post-shift weekday inherits the old regime and misses.
        let bundle = generate_synthetic(&SynthConfig {
            seed: 1,
            n_days: 42,
            base_mw: 15_000.0,
            weekday_amp: 6_000.0,
            weekend_amp: 3_500.0,
            shift_day: 28,
            post_shift_weekday_amp: None,
            weather_coupling: 0.0,
            noise_sd: 0.0,
        })
        .unwrap();
        let sources = RawSources {
            load: bundle.load,
            weather: vec![],
            covid: vec![],
            mobility: vec![],
        };
        let ds = prepare_dataset(&sources, &[]).unwrap();
        let start = bundle.config.start_date();

        let mut pre_weekday = Vec::new();
        let mut first_post_weekday = None;
        for day in 7..bundle.config.n_days {
            let date = start.add_days(i64::from(day));
            if date.weekday().is_weekend() {
                continue;
            }
            let forecast = seasonal_naive(&ds, date).unwrap();
            let actual = day_actuals(&ds, date).unwrap();
            let m = mape(&actual, &forecast).unwrap();
            if day < bundle.config.shift_day {
                pre_weekday.push(m);
            } else if first_post_weekday.is_none() {
                first_post_weekday = Some(m);
            }
        }
        let pre_avg = pre_weekday.iter().sum::<f64>() / pre_weekday.len() as f64;
        let post = first_post_weekday.unwrap();
        assert!(
            post > pre_avg,
            "post-shift naive error {post} should exceed pre average {pre_avg}"
        );
        assert_eq!(pre_avg, 0.0);
    }
}
