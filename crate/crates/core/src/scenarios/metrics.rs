//! Forecast error metrics and the seasonal-naive baseline.

use crate::series::{AlignedDataset, Date, Timestamp};

use super::ScenarioError;

/// Mean Absolute Percentage Error in percent: `(100/n) Σ |aᵢ − fᵢ| / |aᵢ|`.
///
/// Undefined when any actual value is zero; the error reports the offending
/// position (see [`mape_at`] for timestamped diagnostics).
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64, ScenarioError> {
    if actual.is_empty() || actual.len() != forecast.len() {
        return Err(ScenarioError::MetricLength {
            actual: actual.len(),
            forecast: forecast.len(),
        });
    }
    let mut sum = 0.0;
    for (i, (a, f)) in actual.iter().zip(forecast).enumerate() {
        if *a == 0.0 {
            return Err(ScenarioError::ZeroActual {
                at: format!("index {i}"),
            });
        }
        sum += (a - f).abs() / a.abs();
    }
    Ok(100.0 * sum / actual.len() as f64)
}

/// [`mape`] with zero-actual errors naming the wall-clock hour, for series
/// whose first element sits at `start`.
pub fn mape_at(actual: &[f64], forecast: &[f64], start: Timestamp) -> Result<f64, ScenarioError> {
    mape(actual, forecast).map_err(|e| match e {
        ScenarioError::ZeroActual { at } => {
            let index: i64 = at
                .strip_prefix("index ")
                .and_then(|s| s.parse().ok())
                .unwrap_or(0);
            ScenarioError::ZeroActual {
                at: start.add_hours(index).to_string(),
            }
        }
        other => other,
    })
}

/// Forecast day `d` as the observed load of day `d − 7`.
pub fn seasonal_naive(ds: &AlignedDataset, day: Date) -> Result<Vec<f64>, ScenarioError> {
    let source = day.add_days(-7);
    let target = ds.target_position();
    (0..24)
        .map(|h| {
            ds.value_at(target, source.midnight().add_hours(h))
                .ok_or(ScenarioError::MissingHistory { needed: source })
        })
        .collect()
}

/// The target channel's 24 values on a date, if the day is fully present.
pub fn day_actuals(ds: &AlignedDataset, day: Date) -> Option<Vec<f64>> {
    let target = ds.target_position();
    (0..24)
        .map(|h| ds.value_at(target, day.midnight().add_hours(h)))
        .collect()
}
