//! Model files.
//!
//! ```json
//! {"d": 1, "N": 2, "L": 1, "velocities": [[0.5], [-0.1]], "B": [[-2, 3], [-1, -1]]}
//! ```
//!
//! `L` defaults to 1. An optional `velocities_exact` field mirrors
//! `velocities` with strings such as `"1/4"` for exact periodicity checks.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use trspec_core::model::Rational;
use trspec_core::{ModelSpec, RealMatrix};

use crate::error::{AppError, AppResult, ModelContext};

fn default_length() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L", default = "default_length")]
    pub length: f64,
    pub velocities: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocities_exact: Option<Vec<Vec<String>>>,
}

impl ModelFile {
    pub fn from_spec(spec: &ModelSpec) -> Self {
        Self {
            d: spec.dim(),
            n: spec.components(),
            length: spec.length(),
            velocities: spec.velocities(),
            b: spec.reaction().to_rows(),
            velocities_exact: spec
                .exact_velocities()
                .map(|rows| rows.iter().map(|r| r.iter().map(|q| q.to_string()).collect()).collect()),
        }
    }

    pub fn to_spec(&self) -> AppResult<ModelSpec> {
        if self.n == 0 {
            return Err(AppError::Input("field `N` must be at least 1".into()));
        }
        if self.velocities.len() != self.n {
            return Err(AppError::Input(format!(
                "field `velocities` has {} entries, expected N = {}",
                self.velocities.len(),
                self.n
            )));
        }
        if self.b.len() != self.n {
            return Err(AppError::Input(format!("field `B` has {} rows, expected N = {}", self.b.len(), self.n)));
        }
        if let Some(row) = self.b.iter().position(|r| r.len() != self.n) {
            return Err(AppError::Input(format!(
                "field `B` row {row} has {} entries, expected N = {}",
                self.b[row].len(),
                self.n
            )));
        }
        let b = RealMatrix::from_rows(&self.b).ok_or_else(|| AppError::Input("field `B` is ragged".into()))?;
        let spec = ModelSpec::new(self.d, &self.velocities, b, self.length).context("invalid model")?;
        match &self.velocities_exact {
            None => Ok(spec),
            Some(rows) => {
                let exact = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|s| s.parse::<Rational>())
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .context("field `velocities_exact`")?;
                spec.with_exact_velocities(&exact).context("field `velocities_exact`")
            }
        }
    }
}

pub fn parse_model(text: &str) -> AppResult<ModelSpec> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| AppError::Input(format!("model file: {e}")))?;
    file.to_spec()
}

pub fn read_to_string(path: &Path) -> AppResult<String> {
    fs::read_to_string(path).map_err(|e| AppError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> AppResult<ModelSpec> {
    parse_model(&read_to_string(path)?).map_err(|e| match e {
        AppError::Input(msg) => AppError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn model_to_json(spec: &ModelSpec) -> String {
    serde_json::to_string_pretty(&ModelFile::from_spec(spec)).expect("model serializes")
}
