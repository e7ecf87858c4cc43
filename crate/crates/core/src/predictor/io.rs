// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use super::{Ensemble, TrainedModel, TreeNode};
use crate::features::schema_hash;

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const MODEL_EXTENSION: &str = ".lcmodel.json";

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u64 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("model was trained on feature schema {found}, current schema is {expected}")]
    SchemaHashMismatch { expected: String, found: String },
}

pub fn model_to_json(model: &TrainedModel) -> String {
    let mut s = serde_json::to_string_pretty(model).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str) -> Result<TrainedModel, ModelIoError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| ModelIoError::Corrupt("missing format_version".into()))?;
    if version != MODEL_FORMAT_VERSION as u64 {
        return Err(ModelIoError::VersionMismatch {
            expected: MODEL_FORMAT_VERSION,
            found: version,
        });
    }
    let model: TrainedModel = serde_json::from_value(value).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    validate(&model)?;
    let expected = schema_hash();
    if model.schema_hash != expected {
        return Err(ModelIoError::SchemaHashMismatch {
            expected,
            found: model.schema_hash,
        });
    }
    Ok(model)
}

fn validate(m: &TrainedModel) -> Result<(), ModelIoError> {
    let corrupt = |msg: String| Err(ModelIoError::Corrupt(msg));
    if !(m.learning_rate > 0.0 && m.learning_rate <= 1.0) {
        return corrupt(format!("learning_rate {} out of range", m.learning_rate));
    }
    for (name, e) in [("power", &m.power), ("tns", &m.tns)] {
        validate_ensemble(name, e, m.feature_names.len()).or_else(corrupt)?;
    }
    Ok(())
}

fn validate_ensemble(name: &str, e: &Ensemble, n_features: usize) -> Result<(), String> {
    if e.trees.is_empty() {
        return Err(format!("{} ensemble has no trees", name));
    }
    if !e.base_score.is_finite() {
        return Err(format!("{} base_score is not finite", name));
    }
    for (t, tree) in e.trees.iter().enumerate() {
        let n = tree.nodes.len();
        if n == 0 {
            return Err(format!("{} tree {} is empty", name, t));
        }
        for (i, node) in tree.nodes.iter().enumerate() {
            match node {
                TreeNode::Leaf { value } if !value.is_finite() => {
                    return Err(format!("{} tree {} node {}: non-finite leaf", name, t, i));
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    // Children come after their parent, which also rules out cycles.
                    if *feature >= n_features || !threshold.is_finite() || *left <= i || *right <= i || *left >= n || *right >= n {
                        return Err(format!("{} tree {} node {}: invalid split", name, t, i));
                    }
                }
                _ => {}
            }
        }
    }
    Ok(())
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<(), ModelIoError> {
    std::fs::write(path, model_to_json(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedModel, ModelIoError> {
    let text = std::fs::read_to_string(path)?;
    model_from_json(&text)
}
