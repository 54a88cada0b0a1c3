//! Minimal reverse-mode autodiff over dense matrices, the three forecaster
//! architectures, and a deterministic Adam training loop.

mod checkpoint;
mod graph;
mod model;
mod optimizer;
mod tensor;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_SCHEMA_VERSION};
pub use graph::{Graph, NodeId};
pub use model::{
    bind_params, forward_model, predict_mw, predict_normalized, Architecture, ModelParameters,
    NamedTensor, ParamNodes, OUTPUT_HOURS,
};
pub use optimizer::{clip_global_norm, AdamConfig, AdamState};
pub use tensor::Tensor;
pub use train::{
    evaluate, loss_mse, train, TrainConfig, TrainTrace, GRAD_CLIP_NORM, MIN_TRAIN_WINDOWS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch in {op}: {left} vs {right}")]
    Shape {
        op: &'static str,
        left: String,
        right: String,
    },
    #[error("non-finite values produced by {op}{}", fmt_step(.step))]
    Numeric { op: &'static str, step: Option<usize> },
    #[error("graph already consumed by backward; build a fresh graph")]
    GraphConsumed,
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("need at least {min} supervised windows to train, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("invalid train config: {}", .0.join("; "))]
    InvalidTrainConfig(Vec<String>),
    #[error("unknown architecture {0:?} (expected fcdnn, lstm, or gru)")]
    UnknownArchitecture(String),
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: String, message: String },
}

fn fmt_step(step: &Option<usize>) -> String {
    match step {
        Some(s) => format!(" at sequence step {s}"),
        None => String::new(),
    }
}

impl NeuralError {
    /// Attach the recurrent step index to a numeric error.
    pub(crate) fn at_step(self, step: usize) -> NeuralError {
        match self {
            NeuralError::Numeric { op, step: None } => NeuralError::Numeric {
                op,
                step: Some(step),
            },
            other => other,
        }
    }

    /// Promote a numeric error inside a training epoch to a divergence error.
    pub(crate) fn at_epoch(self, epoch: usize) -> NeuralError {
        match self {
            NeuralError::Numeric { .. } => NeuralError::Diverged { epoch },
            other => other,
        }
    }
}
