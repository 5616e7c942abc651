//! The JSON-shaped model spec file.
//!
//! ```json
//! {
//!   "kind": "diagonal",
//!   "riesz": ["i/4", "i/6"],
//!   "invertible": ["-1", "-2+1i"]
//! }
//! ```
//!
//! The Riesz list may also be a rule, `{"rule": "i/(2k+2)", "count": 8}`,
//! expanded at k = 1..=count; rule grammar is `c/(a k + b)` or geometric
//! `c*q^k` (see [`crate::scalar`]). Dense models carry `"entries"` as rows of
//! complex strings, direct sums carry `"summands"`. An optional `"forcing"`
//! array supplies one descriptor per coordinate for the second-order ODE:
//! `{"type": "poly", "coeffs": [...]}` or
//! `{"type": "trig", "omega": w, "phase": p, "amp": a}`.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::ode2::{Forcing, ForcingComponent};
use crate::opmodel::OperatorModel;
use crate::scalar;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelSpec {
    Diagonal {
        #[serde(default)]
        riesz: Option<SequenceSpec>,
        #[serde(default)]
        invertible: Option<Vec<String>>,
    },
    Dense {
        entries: Vec<Vec<String>>,
    },
    DirectSum {
        summands: Vec<ModelSpec>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SequenceSpec {
    List(Vec<String>),
    Rule { rule: String, count: usize },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ForcingSpec {
    Poly { coeffs: Vec<String> },
    Trig { omega: f64, phase: f64, amp: String },
}

#[derive(Debug, Deserialize)]
struct FileSpec {
    #[serde(flatten)]
    model: ModelSpec,
    #[serde(default)]
    forcing: Option<Vec<ForcingSpec>>,
}

/// A parsed spec file: the operator model plus its optional forcing section.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub model: OperatorModel,
    pub forcing: Option<Forcing>,
}

pub fn parse_model_file(text: &str) -> Result<ModelFile> {
    let spec: FileSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model spec: {e}")))?;
    let model = build_model(&spec.model)?;
    model.validate()?;
    let forcing = match spec.forcing {
        Some(components) => Some(build_forcing(&components)?),
        None => None,
    };
    Ok(ModelFile { model, forcing })
}

pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_model_file(&text)
}

/// Parses a bare JSON array of forcing descriptors.
pub fn parse_forcing(text: &str) -> Result<Forcing> {
    let specs: Vec<ForcingSpec> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("forcing spec: {e}")))?;
    build_forcing(&specs)
}

fn build_model(spec: &ModelSpec) -> Result<OperatorModel> {
    match spec {
        ModelSpec::Diagonal { riesz, invertible } => {
            let riesz = match riesz {
                Some(SequenceSpec::List(items)) => parse_all(items)?,
                Some(SequenceSpec::Rule { rule, count }) => scalar::expand_rule(rule, *count)?,
                None => Vec::new(),
            };
            let invertible = match invertible {
                Some(items) => parse_all(items)?,
                None => Vec::new(),
            };
            Ok(OperatorModel::diagonal(riesz, invertible))
        }
        ModelSpec::Dense { entries } => {
            let rows = entries.len();
            let mut matrix = CMat::zeros((rows, rows));
            for (i, row) in entries.iter().enumerate() {
                if row.len() != rows {
                    return Err(Error::Parse(format!(
                        "dense row {i} has {} entries, expected {rows}",
                        row.len()
                    )));
                }
                for (j, cell) in row.iter().enumerate() {
                    matrix[[i, j]] = scalar::parse_complex(cell)?;
                }
            }
            Ok(OperatorModel::dense(matrix))
        }
        ModelSpec::DirectSum { summands } => {
            let parts: Result<Vec<OperatorModel>> = summands.iter().map(build_model).collect();
            Ok(OperatorModel::direct_sum(parts?))
        }
    }
}

fn build_forcing(specs: &[ForcingSpec]) -> Result<Forcing> {
    let components: Result<Vec<ForcingComponent>> = specs
        .iter()
        .map(|spec| match spec {
            ForcingSpec::Poly { coeffs } => {
                Ok(ForcingComponent::Poly { coeffs: parse_all(coeffs)? })
            }
            ForcingSpec::Trig { omega, phase, amp } => Ok(ForcingComponent::Trig {
                omega: *omega,
                phase: *phase,
                amp: scalar::parse_complex(amp)?,
            }),
        })
        .collect();
    Ok(Forcing { components: components? })
}

fn parse_all(items: &[String]) -> Result<Vec<Complex64>> {
    items.iter().map(|s| scalar::parse_complex(s)).collect()
}
