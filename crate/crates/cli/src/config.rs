// SPDX-License-Identifier: Apache-2.0

//! Model configuration: a JSON document with `levels`, `generator`, and an
//! optional `initial` distribution.

use std::path::Path;

use ddtn_core::linalg::RMatrix;
use ddtn_core::NoiseModel;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub levels: Vec<f64>,
    pub generator: Vec<Vec<f64>>,
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

impl ModelConfig {
    pub fn into_model(self) -> Result<NoiseModel, CliError> {
        let generator = RMatrix::from_rows(&self.generator)?;
        Ok(NoiseModel::new(self.levels, generator, self.initial)?)
    }
}

pub fn load_model(path: &Path) -> Result<NoiseModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let config: ModelConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("malformed config {}: {e}", path.display())))?;
    config.into_model()
}
