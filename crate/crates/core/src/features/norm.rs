//! Per-channel z-score normalization fitted on training windows only.

use serde::{Deserialize, Serialize};

use super::windows::WindowSet;

/// Channel means and standard deviations from a training `WindowSet`.
///
/// Standard deviations are population (divide by n). A channel with zero
/// spread — the zero-filled COVID channel in a pre-period training set, for
/// example — gets its sd replaced by 1.0 and is flagged constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub channel_names: Vec<String>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub constant: Vec<bool>,
    /// Column whose stats also normalize the targets.
    pub target_channel: usize,
}

impl NormStats {
    pub fn is_constant(&self, channel: usize) -> bool {
        self.constant[channel]
    }
}

pub fn fit_norm(ws: &WindowSet) -> NormStats {
    let n_channels = ws.n_channels();
    let mut sum = vec![0.0f64; n_channels];
    let mut count = 0usize;
    for i in 0..ws.len() {
        for hour_values in ws.input(i).chunks_exact(n_channels) {
            for (c, v) in hour_values.iter().enumerate() {
                sum[c] += v;
            }
            count += 1;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();

    let mut sq = vec![0.0f64; n_channels];
    for i in 0..ws.len() {
        for hour_values in ws.input(i).chunks_exact(n_channels) {
            for (c, v) in hour_values.iter().enumerate() {
                let d = v - mean[c];
                sq[c] += d * d;
            }
        }
    }
    let mut sd: Vec<f64> = sq.iter().map(|s| (s / count as f64).sqrt()).collect();
    let constant: Vec<bool> = sd.iter().map(|&s| s == 0.0).collect();
    for (s, &flat) in sd.iter_mut().zip(&constant) {
        if flat {
            *s = 1.0;
        }
    }

    let (channel_names, target_channel) = ws.clone_shape();
    NormStats {
        channel_names,
        mean,
        sd,
        constant,
        target_channel,
    }
}

/// Z-score all inputs per channel and the targets with the target channel's
/// stats.
pub fn apply_norm(ws: &WindowSet, stats: &NormStats) -> WindowSet {
    let n_channels = ws.n_channels();
    debug_assert_eq!(stats.mean.len(), n_channels);
    let inputs: Vec<Vec<f64>> = (0..ws.len())
        .map(|i| {
            ws.input(i)
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let c = j % n_channels;
                    (v - stats.mean[c]) / stats.sd[c]
                })
                .collect()
        })
        .collect();
    let tm = stats.mean[stats.target_channel];
    let tsd = stats.sd[stats.target_channel];
    let targets: Vec<Vec<f64>> = (0..ws.len())
        .map(|i| ws.target(i).iter().map(|v| (v - tm) / tsd).collect())
        .collect();

    let (channel_names, target_channel) = ws.clone_shape();
    WindowSet::from_parts(
        channel_names,
        target_channel,
        inputs,
        targets,
        ws.target_dates().to_vec(),
        (0..ws.len()).map(|i| ws.last_input_ts(i)).collect(),
    )
}

/// Map a normalized prediction back to MW.
pub fn invert_target(pred: &[f64], stats: &NormStats) -> Vec<f64> {
    let m = stats.mean[stats.target_channel];
    let s = stats.sd[stats.target_channel];
    pred.iter().map(|v| v * s + m).collect()
}
