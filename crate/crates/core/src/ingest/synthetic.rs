//! Seeded synthetic data with a stay-at-home-like regime shift.
//!
//! The generated bundle stands in for real market data at desk scale: hourly
//! load with a daytime hump, weekday/weekend amplitude contrast, and an
//! abrupt day at which weekday demand collapses onto the weekend profile
//! while mobility drops and case counts start rising from zero.
//!
//! Generation is fully determined by [`SynthConfig`]. Draws come from three
//! independent [`SplitMix64`](crate::rng::SplitMix64) streams derived from
//! the seed (stream 1 = load, 2 = covid, 3 = mobility; see `rng::derive`).
//! The load stream is consumed one Gaussian per hour in chronological order;
//! the daily streams one Gaussian per day, drawn for every day and discarded
//! before the shift.
//!
//! Closed forms, for re-implementers:
//!
//! - `diurnal(h) = sin(π (h − 5) / 14)` for `5 ≤ h ≤ 19`, else `0`
//! - `temp(h) = 12 + 8 sin(2π (h − 9) / 24)` (°C, same every day)
//! - `load = base_mw + amp · diurnal(h) + weather_coupling · temp(h) +
//!   noise_sd · z`, where `amp` is `weekday_amp` on pre-shift weekdays,
//!   `weekend_amp` on weekends, and `post_shift_weekday_amp` on post-shift
//!   weekdays
//! - `cases(k) = round(25 e^{0.08 k} e^{z})` for day `k ≥ 0` after the
//!   shift, `0` before (an exponentially rising, heavily noisy count)
//! - `workplaces(k) = −38 + 2 z` after the shift, `0` before
//!
//! Day index `shift_day` always lands on 2020-03-22, so the generated shift
//! coincides with the default split boundary.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::rng::{derive, SplitMix64};
use crate::series::{Date, DailySeries, HourlySeries};

use super::{write_daily_csv, write_hourly_csv, IngestError, SourceKind};

/// The calendar date that day index `shift_day` is anchored to.
pub fn shift_anchor() -> Date {
    Date::from_ymd(2020, 3, 22).expect("fixed anchor date")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_days: u32,
    pub base_mw: f64,
    pub weekday_amp: f64,
    pub weekend_amp: f64,
    /// Day index (from the start of the range) at which the regime shifts.
    pub shift_day: u32,
    /// Weekday amplitude after the shift; defaults to `weekend_amp`.
    #[serde(default)]
    pub post_shift_weekday_amp: Option<f64>,
    pub weather_coupling: f64,
    pub noise_sd: f64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        let mut problems = Vec::new();
        if self.n_days < 14 {
            problems.push(format!("n_days must be >= 14, got {}", self.n_days));
        }
        if self.shift_day <= 7 || self.shift_day >= self.n_days {
            problems.push(format!(
                "shift_day must lie in (7, n_days={}), got {}",
                self.n_days, self.shift_day
            ));
        }
        for (name, amp) in [
            ("weekday_amp", self.weekday_amp),
            ("weekend_amp", self.weekend_amp),
            (
                "post_shift_weekday_amp",
                self.post_shift_weekday_amp.unwrap_or(self.weekend_amp),
            ),
        ] {
            if !amp.is_finite() || amp <= 0.0 {
                problems.push(format!("{name} must be > 0, got {amp}"));
            }
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            problems.push(format!("noise_sd must be >= 0, got {}", self.noise_sd));
        }
        if !self.base_mw.is_finite() || !self.weather_coupling.is_finite() {
            problems.push("base_mw and weather_coupling must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(IngestError::InvalidConfig(problems))
        }
    }

    /// First generated calendar date: `shift_day` days before the anchor.
    pub fn start_date(&self) -> Date {
        shift_anchor().add_days(-i64::from(self.shift_day))
    }

    pub fn post_weekday_amp(&self) -> f64 {
        self.post_shift_weekday_amp.unwrap_or(self.weekend_amp)
    }
}

/// One synthetic data set: the four source kinds at minimal channel width.
#[derive(Debug, Clone)]
pub struct SyntheticBundle {
    pub config: SynthConfig,
    pub load: HourlySeries,
    pub weather: HourlySeries,
    pub covid: DailySeries,
    pub mobility: DailySeries,
}

/// Daytime hump: zero overnight, peaking at noon.
pub fn diurnal(hour: u32) -> f64 {
    if (5..=19).contains(&hour) {
        (std::f64::consts::PI * (hour as f64 - 5.0) / 14.0).sin()
    } else {
        0.0
    }
}

/// Deterministic daily temperature cycle (°C).
pub fn temperature(hour: u32) -> f64 {
    12.0 + 8.0 * (std::f64::consts::TAU * (hour as f64 - 9.0) / 24.0).sin()
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticBundle, IngestError> {
    cfg.validate()?;
    let start_date = cfg.start_date();
    let start = start_date.midnight();

    let mut load_rng = SplitMix64::new(derive(cfg.seed, 1));
    let mut covid_rng = SplitMix64::new(derive(cfg.seed, 2));
    let mut mobility_rng = SplitMix64::new(derive(cfg.seed, 3));

    let n_days = cfg.n_days as usize;
    let mut load = Vec::with_capacity(n_days * 24);
    let mut temp = Vec::with_capacity(n_days * 24);
    for day in 0..n_days {
        let date = start_date.add_days(day as i64);
        let weekend = date.weekday().is_weekend();
        let amp = if weekend {
            cfg.weekend_amp
        } else if (day as u32) >= cfg.shift_day {
            cfg.post_weekday_amp()
        } else {
            cfg.weekday_amp
        };
        for hour in 0..24u32 {
            let t = temperature(hour);
            let value = cfg.base_mw
                + amp * diurnal(hour)
                + cfg.weather_coupling * t
                + cfg.noise_sd * load_rng.next_gaussian();
            load.push(value);
            temp.push(t);
        }
    }

    let mut cases = Vec::with_capacity(n_days);
    let mut workplaces = Vec::with_capacity(n_days);
    for day in 0..cfg.n_days {
        let zc = covid_rng.next_gaussian();
        let zm = mobility_rng.next_gaussian();
        if day < cfg.shift_day {
            cases.push(0.0);
            workplaces.push(0.0);
        } else {
            let k = f64::from(day - cfg.shift_day);
            cases.push((25.0 * (0.08 * k).exp() * zc.exp()).round());
            workplaces.push(-38.0 + 2.0 * zm);
        }
    }

    Ok(SyntheticBundle {
        config: cfg.clone(),
        load: HourlySeries::new("load_mw", start, load)?,
        weather: HourlySeries::new("air_temp_c", start, temp)?,
        covid: DailySeries::new("new_cases", start_date, cases)?,
        mobility: DailySeries::new("workplaces_pct_change", start_date, workplaces)?,
    })
}

/// Metadata written next to the generated CSVs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthManifest {
    pub schema_version: u32,
    pub config: SynthConfig,
    pub start_date: Date,
    /// File name → hex SHA-256 of the file bytes.
    pub files: BTreeMap<String, String>,
}

/// Write the bundle as the four schema CSVs plus `manifest.json`.
///
/// The columns the minimal bundle does not model are derived deterministically
/// so the files satisfy the full schemas: dew point, wind and humidity follow
/// the temperature cycle; deaths are 3% of cases; residential mobility is
/// −0.35 × workplace mobility.
pub fn write_bundle(bundle: &SyntheticBundle, dir: &Path) -> Result<SynthManifest, IngestError> {
    let temp = &bundle.weather;
    let n = temp.len();
    let dew: Vec<f64> = temp.values().iter().map(|t| t - 2.5).collect();
    let wind: Vec<f64> = (0..n)
        .map(|i| 3.0 + 1.5 * (std::f64::consts::TAU * ((i % 24) as f64 - 3.0) / 24.0).sin())
        .collect();
    let humidity: Vec<f64> = temp.values().iter().map(|t| 62.0 - 0.8 * (t - 12.0)).collect();
    let dew = HourlySeries::new("dew_point_c", temp.start(), dew)?;
    let wind = HourlySeries::new("wind_speed_ms", temp.start(), wind)?;
    let humidity = HourlySeries::new("rel_humidity_pct", temp.start(), humidity)?;

    let deaths: Vec<f64> = bundle.covid.values().iter().map(|c| (c * 0.03).round()).collect();
    let deaths = DailySeries::new("new_deaths", bundle.covid.start_date(), deaths)?;
    let residential: Vec<f64> = bundle.mobility.values().iter().map(|w| -0.35 * w).collect();
    let residential = DailySeries::new(
        "residential_pct_change",
        bundle.mobility.start_date(),
        residential,
    )?;

    write_hourly_csv(SourceKind::Load, &dir.join("load.csv"), &[&bundle.load])?;
    write_hourly_csv(
        SourceKind::Weather,
        &dir.join("weather.csv"),
        &[temp, &dew, &wind, &humidity],
    )?;
    write_daily_csv(SourceKind::Covid, &dir.join("covid.csv"), &[&bundle.covid, &deaths])?;
    write_daily_csv(
        SourceKind::Mobility,
        &dir.join("mobility.csv"),
        &[&bundle.mobility, &residential],
    )?;

    let mut files = BTreeMap::new();
    for name in ["load.csv", "weather.csv", "covid.csv", "mobility.csv"] {
        files.insert(name.to_string(), file_digest(&dir.join(name))?);
    }
    let manifest = SynthManifest {
        schema_version: 1,
        config: bundle.config.clone(),
        start_date: bundle.config.start_date(),
        files,
    };
    let path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, body).map_err(|source| IngestError::Io { path, source })?;
    Ok(manifest)
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}
