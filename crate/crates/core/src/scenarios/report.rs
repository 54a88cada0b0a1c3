//! Scenario reports: per-day forecast/actual pairs with daily, weekly, and
//! pooled overall MAPE, serialized as a versioned JSON document plus a flat
//! `daily_mape.csv`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::features::FeatureKind;
use crate::neural::Architecture;
use crate::series::Date;

use super::metrics::{mape, mape_at};
use super::ScenarioError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub date: Date,
    pub actual: Vec<f64>,
    pub forecast: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub kind: String,
    pub architecture: Architecture,
    pub features: Vec<FeatureKind>,
    pub seed: u64,
    pub config_fingerprint: String,
    /// Rolling runs: week 1 is produced by the weekend-trained model, before
    /// any post-period feature data exists.
    pub week1_feature_blind: bool,
    pub daily_mape_pct: Vec<f64>,
    pub weekly_mape_pct: Vec<f64>,
    /// Pooled over every hourly point, not the mean of daily values.
    pub overall_mape_pct: f64,
    pub days: Vec<DayRecord>,
}

/// Identity of a report: everything except the measured outcomes.
#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub kind: String,
    pub architecture: Architecture,
    pub features: Vec<FeatureKind>,
    pub seed: u64,
    pub config_fingerprint: String,
    pub week1_feature_blind: bool,
}

/// Compute daily/weekly/overall MAPE from per-day forecasts. Days must come
/// in chronological order and cover whole weeks.
pub fn assemble_report(
    meta: ReportMeta,
    days: Vec<DayRecord>,
) -> Result<ScenarioReport, ScenarioError> {
    if days.is_empty() || !days.len().is_multiple_of(7) {
        return Err(ScenarioError::Report(format!(
            "need a whole number of 7-day weeks, got {} days",
            days.len()
        )));
    }
    for d in &days {
        if d.actual.len() != 24 || d.forecast.len() != 24 {
            return Err(ScenarioError::Report(format!(
                "day {} has {} actual / {} forecast values, expected 24",
                d.date,
                d.actual.len(),
                d.forecast.len()
            )));
        }
    }

    let daily_mape_pct = days
        .iter()
        .map(|d| mape_at(&d.actual, &d.forecast, d.date.midnight()))
        .collect::<Result<Vec<_>, _>>()?;

    let weekly_mape_pct = days
        .chunks(7)
        .map(|week| {
            let (a, f) = pool(week);
            mape_at(&a, &f, week[0].date.midnight())
        })
        .collect::<Result<Vec<_>, _>>()?;

    let (a, f) = pool(&days);
    let overall_mape_pct = mape_at(&a, &f, days[0].date.midnight())?;

    Ok(ScenarioReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: meta.kind,
        architecture: meta.architecture,
        features: meta.features,
        seed: meta.seed,
        config_fingerprint: meta.config_fingerprint,
        week1_feature_blind: meta.week1_feature_blind,
        daily_mape_pct,
        weekly_mape_pct,
        overall_mape_pct,
        days,
    })
}

fn pool(days: &[DayRecord]) -> (Vec<f64>, Vec<f64>) {
    let actual: Vec<f64> = days.iter().flat_map(|d| d.actual.iter().copied()).collect();
    let forecast: Vec<f64> = days.iter().flat_map(|d| d.forecast.iter().copied()).collect();
    (actual, forecast)
}

impl ScenarioReport {
    /// Re-derive the overall MAPE from the stored per-day vectors.
    pub fn recompute_overall(&self) -> Result<f64, ScenarioError> {
        let (a, f) = pool(&self.days);
        mape(&a, &f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(body: &str) -> Result<ScenarioReport, ScenarioError> {
        let report: ScenarioReport =
            serde_json::from_str(body).map_err(|e| ScenarioError::Report(e.to_string()))?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(ScenarioError::Report(format!(
                "schema version {} unsupported (expected {REPORT_SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| ScenarioError::Report(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<ScenarioReport, ScenarioError> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Report(format!("{}: {e}", path.display())))?;
        Self::from_json(&body)
    }

    /// Flat `date,mape_pct` companion file.
    pub fn write_daily_csv(&self, path: &Path) -> Result<(), ScenarioError> {
        let to_err = |e: std::io::Error| ScenarioError::Report(format!("{}: {e}", path.display()));
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(to_err)?);
        writeln!(out, "date,mape_pct").map_err(to_err)?;
        for (day, m) in self.days.iter().zip(&self.daily_mape_pct) {
            writeln!(out, "{},{}", day.date, m).map_err(to_err)?;
        }
        out.flush().map_err(to_err)
    }
}
