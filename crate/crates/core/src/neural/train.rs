//! Deterministic mini-batch training with early stopping on validation MSE.

use serde::{Deserialize, Serialize};

use crate::features::{apply_norm, fit_norm, WindowSet};
use crate::rng::{derive, SplitMix64};

use super::graph::Graph;
use super::model::{bind_params, forward_model, Architecture, ModelParameters};
use super::optimizer::{clip_global_norm, AdamConfig, AdamState};
use super::tensor::Tensor;
use super::NeuralError;

/// Fewest supervised samples a training run will accept.
pub const MIN_TRAIN_WINDOWS: usize = 10;

/// Gradients are clipped to this global L2 norm before every update;
/// 168-step recurrences can spike.
pub const GRAD_CLIP_NORM: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Stop after this many epochs without a new best validation loss.
    pub patience: usize,
    /// Chronological tail fraction held out for validation.
    pub val_fraction: f64,
    pub hidden_fcdnn: Vec<usize>,
    pub hidden_rnn: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            patience: 5,
            val_fraction: 0.1,
            hidden_fcdnn: vec![64, 64],
            hidden_rnn: 64,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let mut problems = Vec::new();
        if self.epochs == 0 {
            problems.push("epochs must be >= 1".to_string());
        }
        if self.batch_size == 0 {
            problems.push("batch_size must be >= 1".to_string());
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            problems.push(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if self.patience == 0 {
            problems.push("patience must be >= 1".to_string());
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 0.5) {
            problems.push(format!(
                "val_fraction must lie in (0, 0.5), got {}",
                self.val_fraction
            ));
        }
        if self.hidden_fcdnn.is_empty() || self.hidden_fcdnn.contains(&0) {
            problems.push(format!("hidden_fcdnn must be non-empty positive, got {:?}", self.hidden_fcdnn));
        }
        if self.hidden_rnn == 0 {
            problems.push("hidden_rnn must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(NeuralError::InvalidTrainConfig(problems))
        }
    }

    pub fn hidden_for(&self, architecture: Architecture) -> Vec<usize> {
        match architecture {
            Architecture::Fcdnn => self.hidden_fcdnn.clone(),
            Architecture::Lstm | Architecture::Gru => vec![self.hidden_rnn],
        }
    }
}

/// Per-epoch loss history of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub epochs_run: usize,
}

/// Mean squared error over two equal-length slices.
pub fn loss_mse(pred: &[f64], target: &[f64]) -> f64 {
    assert_eq!(pred.len(), target.len(), "loss_mse needs equal lengths");
    pred.iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64
}

/// Train one architecture on raw (MW) windows.
///
/// The chronological tail (`val_fraction`) is held out; normalization stats
/// are fitted on the training part only and travel with the returned
/// parameters. Initialization and batch order derive from `cfg.seed`, so the
/// result is a pure function of (architecture, windows, config). The
/// parameters returned are those of the best validation epoch.
pub fn train(
    architecture: Architecture,
    windows: &WindowSet,
    cfg: &TrainConfig,
) -> Result<(ModelParameters, TrainTrace), NeuralError> {
    cfg.validate()?;
    let n = windows.len();
    if n < MIN_TRAIN_WINDOWS {
        return Err(NeuralError::TooFewSamples {
            got: n,
            min: MIN_TRAIN_WINDOWS,
        });
    }

    let n_val = ((n as f64 * cfg.val_fraction).floor() as usize).max(1);
    let n_train = n - n_val;
    let train_raw = windows.slice_samples(0, n_train);
    let val_raw = windows.slice_samples(n_train, n);

    let stats = fit_norm(&train_raw);
    let train_set = apply_norm(&train_raw, &stats);
    let val_set = apply_norm(&val_raw, &stats);

    let mut params = ModelParameters::init(
        architecture,
        windows.n_channels(),
        train_set.input(0).len() / windows.n_channels(),
        cfg.hidden_for(architecture),
        stats,
        derive(cfg.seed, 11),
    );
    let mut shuffle_rng = SplitMix64::new(derive(cfg.seed, 12));
    let adam_cfg = AdamConfig::with_learning_rate(cfg.learning_rate);
    let mut adam = AdamState::new(&params);

    let mut trace = TrainTrace {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: 0,
        best_val_loss: f64::INFINITY,
        epochs_run: 0,
    };
    let mut best_params = params.clone();
    let mut order: Vec<usize> = (0..n_train).collect();

    for epoch in 0..cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut sample_count = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let loss = train_batch(&mut params, &mut adam, &adam_cfg, &train_set, chunk)
                .map_err(|e| e.at_epoch(epoch))?;
            if !loss.is_finite() {
                return Err(NeuralError::Diverged { epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            sample_count += chunk.len();
        }
        let train_loss = loss_sum / sample_count as f64;

        let val_loss = evaluate(&params, &val_set, cfg.batch_size).map_err(|e| e.at_epoch(epoch))?;
        if !val_loss.is_finite() {
            return Err(NeuralError::Diverged { epoch });
        }
        trace.train_loss.push(train_loss);
        trace.val_loss.push(val_loss);
        trace.epochs_run = epoch + 1;

        if val_loss < trace.best_val_loss {
            trace.best_val_loss = val_loss;
            trace.best_epoch = epoch;
            best_params = params.clone();
        } else if epoch - trace.best_epoch >= cfg.patience {
            break;
        }
    }

    Ok((best_params, trace))
}

fn train_batch(
    params: &mut ModelParameters,
    adam: &mut AdamState,
    adam_cfg: &AdamConfig,
    set: &WindowSet,
    idx: &[usize],
) -> Result<f64, NeuralError> {
    let mut graph = Graph::new();
    let nodes = bind_params(&mut graph, params);
    let batch: Vec<&[f64]> = idx.iter().map(|&i| set.input(i)).collect();
    let pred = forward_model(&mut graph, params, &nodes, &batch)?;

    let target_data: Vec<f64> = idx.iter().flat_map(|&i| set.target(i).iter().copied()).collect();
    let target = graph.leaf(Tensor::from_vec(idx.len(), set.target(0).len(), target_data)?);
    let loss = graph.mse(pred, target)?;
    let loss_value = graph.value(loss).data()[0];

    graph.backward(loss)?;
    let mut grads: Vec<Tensor> = nodes.ids.iter().map(|&id| graph.grad(id).clone()).collect();
    clip_global_norm(&mut grads, GRAD_CLIP_NORM);
    adam.step(params, &grads, adam_cfg);
    Ok(loss_value)
}

/// Forward-only MSE over a whole window set, batched to bound graph size.
pub fn evaluate(
    params: &ModelParameters,
    set: &WindowSet,
    batch_size: usize,
) -> Result<f64, NeuralError> {
    let idx: Vec<usize> = (0..set.len()).collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for chunk in idx.chunks(batch_size.max(1)) {
        let mut graph = Graph::new();
        let nodes = bind_params(&mut graph, params);
        let batch: Vec<&[f64]> = chunk.iter().map(|&i| set.input(i)).collect();
        let out = forward_model(&mut graph, params, &nodes, &batch)?;
        let pred = graph.value(out).clone();
        for (row, &i) in chunk.iter().enumerate() {
            sum += pred.row(row)
                .iter()
                .zip(set.target(i))
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>();
            count += set.target(i).len();
        }
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::build_windows;
    use crate::series::{align, HourlySeries, Timestamp};

    fn daily_pattern_windows(days: usize) -> WindowSet {
        let start = Timestamp::from_ymdh(2020, 1, 6, 0).unwrap();
        let values: Vec<f64> = (0..days * 24)
            .map(|i| 15_000.0 + 3_000.0 * (std::f64::consts::TAU * (i % 24) as f64 / 24.0).sin())
            .collect();
        let load = HourlySeries::new("load_mw", start, values).unwrap();
        let ds = align(&[load], "load_mw").unwrap();
        build_windows(&ds, false).unwrap()
    }

    fn fast_config() -> TrainConfig {
        TrainConfig {
            seed: 3,
            epochs: 50,
            batch_size: 8,
            learning_rate: 0.05,
            patience: 10,
            val_fraction: 0.2,
            hidden_fcdnn: vec![8, 8],
            hidden_rnn: 8,
        }
    }

    #[test]
    fn mse_examples() {
        assert_eq!(loss_mse(&[1.0; 24], &[1.0; 24]), 0.0);
        assert_eq!(loss_mse(&[2.0; 24], &[1.0; 24]), 1.0);
        let mut pred = vec![0.0; 24];
        pred[0] = 1.0;
        assert_eq!(loss_mse(&pred, &[0.0; 24]), 1.0 / 24.0);
    }

    #[test]
    fn training_is_deterministic() {
        let ws = daily_pattern_windows(20);
        let cfg = TrainConfig {
            epochs: 3,
            ..fast_config()
        };
        let (p1, t1) = train(Architecture::Lstm, &ws, &cfg).unwrap();
        let (p2, t2) = train(Architecture::Lstm, &ws, &cfg).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(t1, t2);

        let (p3, _) = train(Architecture::Lstm, &ws, &TrainConfig { seed: 4, ..cfg }).unwrap();
        assert_ne!(p1, p3);
    }

    #[test]
    fn constant_daily_pattern_is_learned() {
        // Every day repeats the same 24-hour profile, so the head alone can
        // absorb it; validation MSE must approach zero within 50 epochs.
        let ws = daily_pattern_windows(30);
        let (_, trace) = train(Architecture::Fcdnn, &ws, &fast_config()).unwrap();
        assert!(
            trace.best_val_loss < 1e-3,
            "val loss stayed at {}",
            trace.best_val_loss
        );
    }

    #[test]
    fn early_stopping_honors_patience() {
        // Zero-ish learning rate keeps validation loss constant, so the best
        // epoch is the first and training must stop `patience` epochs later.
        let ws = daily_pattern_windows(20);
        let cfg = TrainConfig {
            learning_rate: 1e-30,
            patience: 2,
            epochs: 50,
            ..fast_config()
        };
        let (_, trace) = train(Architecture::Gru, &ws, &cfg).unwrap();
        assert_eq!(trace.best_epoch, 0);
        assert_eq!(trace.epochs_run, 3, "stop after patience epochs without improvement");
    }

    #[test]
    fn best_validation_loss_is_monotone() {
        let ws = daily_pattern_windows(25);
        let (_, trace) = train(Architecture::Lstm, &ws, &fast_config()).unwrap();
        let mut best = f64::INFINITY;
        let mut bests = Vec::new();
        for &v in &trace.val_loss {
            best = best.min(v);
            bests.push(best);
        }
        assert!(bests.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(trace.best_val_loss, best);
    }

    #[test]
    fn too_few_windows_rejected() {
        let ws = daily_pattern_windows(10); // 3 samples
        assert!(matches!(
            train(Architecture::Fcdnn, &ws, &fast_config()).unwrap_err(),
            NeuralError::TooFewSamples { got: 3, min: 10 }
        ));
    }

    #[test]
    fn invalid_config_lists_problems() {
        let cfg = TrainConfig {
            epochs: 0,
            val_fraction: 0.9,
            ..TrainConfig::default()
        };
        let err = cfg.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epochs") && msg.contains("val_fraction"), "{msg}");
    }
}
