//! Model checkpoints: a versioned JSON container holding the architecture
//! tag, layout, normalization stats, and every tensor. JSON floats are
//! printed in shortest round-trip form, so write → read is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::ModelParameters;
use super::NeuralError;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    schema_version: u32,
    params: ModelParameters,
}

pub fn save_checkpoint(params: &ModelParameters, path: &Path) -> Result<(), NeuralError> {
    let file = CheckpointFile {
        schema_version: CHECKPOINT_SCHEMA_VERSION,
        params: params.clone(),
    };
    let body = serde_json::to_string_pretty(&file).map_err(|e| err(path, e.to_string()))?;
    std::fs::write(path, body).map_err(|e| err(path, e.to_string()))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParameters, NeuralError> {
    let body = std::fs::read_to_string(path).map_err(|e| err(path, e.to_string()))?;
    let file: CheckpointFile =
        serde_json::from_str(&body).map_err(|e| err(path, e.to_string()))?;
    if file.schema_version != CHECKPOINT_SCHEMA_VERSION {
        return Err(err(
            path,
            format!(
                "schema version {} unsupported (expected {CHECKPOINT_SCHEMA_VERSION})",
                file.schema_version
            ),
        ));
    }
    file.params.validate_shapes()?;
    Ok(file.params)
}

fn err(path: &Path, message: String) -> NeuralError {
    NeuralError::Checkpoint {
        path: path.display().to_string(),
        message,
    }
}
