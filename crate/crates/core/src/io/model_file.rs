//! Versioned JSON model files: structure plus flat `theta` and `w0`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fs::{read_text, write_json};
use crate::diff::ParamGroup;
use crate::error::{Error, Result};
use crate::models::{Model, ModelStructure};

pub const MODEL_FORMAT: &str = "sysid-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub structure: ModelStructure,
    pub theta: Vec<f64>,
    pub w0: Vec<f64>,
    /// Informational: named slices of `theta ++ w0`.
    #[serde(default)]
    pub groups: Vec<GroupEntry>,
}

impl ModelFile {
    pub fn new(model: &Model, params: &[f64]) -> Result<Self> {
        if params.len() != model.n_params() {
            return Err(Error::dims("model parameters", model.n_params(), params.len()));
        }
        let (theta, w0) = params.split_at(model.n_theta());
        Ok(ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            structure: model.structure.clone(),
            theta: theta.to_vec(),
            w0: w0.to_vec(),
            groups: model
                .layout
                .groups()
                .iter()
                .map(|g: &ParamGroup| GroupEntry {
                    name: g.name.clone(),
                    start: g.start,
                    len: g.len,
                })
                .collect(),
        })
    }

    /// Rebuild the model and its parameter vector, checking the counts.
    pub fn into_model(self, path: &Path) -> Result<(Model, Vec<f64>)> {
        let schema = |msg: String| Error::Schema {
            path: path.to_path_buf(),
            msg,
        };
        if self.format != MODEL_FORMAT {
            return Err(schema(format!("format `{}` is not `{MODEL_FORMAT}`", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(schema(format!("unsupported model version {}", self.version)));
        }
        let model = Model::new(self.structure)?;
        if self.theta.len() != model.n_theta() || self.w0.len() != model.layout.n_w0() {
            return Err(schema(format!(
                "parameter counts {}+{} do not match the structure ({}+{})",
                self.theta.len(),
                self.w0.len(),
                model.n_theta(),
                model.layout.n_w0()
            )));
        }
        if self.theta.iter().chain(&self.w0).any(|v| !v.is_finite()) {
            return Err(schema("non-finite parameter".into()));
        }
        let mut p = self.theta;
        p.extend(self.w0);
        Ok((model, p))
    }
}

pub fn save_model(path: &Path, model: &Model, params: &[f64]) -> Result<()> {
    write_json(path, &ModelFile::new(model, params)?)
}

pub fn load_model(path: &Path) -> Result<(Model, Vec<f64>)> {
    let text = read_text(path)?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    file.into_model(path)
}
