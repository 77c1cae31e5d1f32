//! Canonical file schemas: operator descriptions and solver results.
//!
//! Operators serialize as a schema-tagged JSON document listing the
//! non-zero gain entries and the per-row aggregation kinds. The parametric
//! gain families round-trip losslessly; `Custom` evaluators cannot be
//! serialized and are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gains::{Aggregation, GainError, GainMatrix, GainSpec, MonotoneOperator};
use crate::solver::{DecayResult, SfpConfig};

pub const OPERATOR_SCHEMA: &str = "gain-operator/v1";
pub const RESULT_SCHEMA: &str = "decay-result/v1";

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema tag {got:?}, expected {expected:?}")]
    UnsupportedSchema { got: String, expected: String },
    #[error("custom gains and aggregations cannot be serialized")]
    NotSerializable,
    #[error("invalid operator description: {0}")]
    Validation(String),
    #[error(transparent)]
    Gain(#[from] GainError),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainFile {
    Zero,
    Linear { slope: f64 },
    Power { coef: f64, exponent: f64 },
    LogExp { coef: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum AggregationFile {
    Sum,
    Max,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GainEntryFile {
    pub i: usize,
    pub j: usize,
    pub gain: GainFile,
}

/// Schema-tagged operator description: dimension, non-zero entries, one
/// aggregation per row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorFile {
    pub schema: String,
    pub dim: usize,
    pub entries: Vec<GainEntryFile>,
    pub aggregation: Vec<AggregationFile>,
}

impl OperatorFile {
    pub fn from_operator(op: &MonotoneOperator) -> Result<Self, SchemaError> {
        let n = op.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                match gain_to_file(op.gamma().entry(i, j))? {
                    GainFile::Zero => {}
                    gain => entries.push(GainEntryFile { i, j, gain }),
                }
            }
        }
        let aggregation = (0..n)
            .map(|i| match op.aggregation(i) {
                Aggregation::Sum => Ok(AggregationFile::Sum),
                Aggregation::Max => Ok(AggregationFile::Max),
                Aggregation::Custom(_) => Err(SchemaError::NotSerializable),
            })
            .collect::<Result<_, _>>()?;
        Ok(OperatorFile {
            schema: OPERATOR_SCHEMA.to_string(),
            dim: n,
            entries,
            aggregation,
        })
    }

    pub fn to_operator(&self) -> Result<MonotoneOperator, SchemaError> {
        if self.schema != OPERATOR_SCHEMA {
            return Err(SchemaError::UnsupportedSchema {
                got: self.schema.clone(),
                expected: OPERATOR_SCHEMA.to_string(),
            });
        }
        if self.dim == 0 {
            return Err(SchemaError::Validation("dimension must be positive".into()));
        }
        if self.aggregation.len() != self.dim {
            return Err(SchemaError::Validation(format!(
                "need {} aggregation kinds, got {}",
                self.dim,
                self.aggregation.len()
            )));
        }
        let mut gamma = GainMatrix::zero(self.dim)?;
        for entry in &self.entries {
            if entry.i >= self.dim || entry.j >= self.dim {
                return Err(SchemaError::Validation(format!(
                    "entry ({}, {}) out of range for dimension {}",
                    entry.i, entry.j, self.dim
                )));
            }
            if !gamma.entry(entry.i, entry.j).is_zero() {
                return Err(SchemaError::Validation(format!(
                    "duplicate entry ({}, {})",
                    entry.i, entry.j
                )));
            }
            gamma.set_entry(entry.i, entry.j, gain_from_file(&entry.gain)?);
        }
        let mu = self
            .aggregation
            .iter()
            .map(|a| match a {
                AggregationFile::Sum => Aggregation::Sum,
                AggregationFile::Max => Aggregation::Max,
            })
            .collect();
        Ok(MonotoneOperator::new(gamma, mu)?)
    }

    pub fn read(path: &Path) -> Result<Self, SchemaError> {
        let text = fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), SchemaError> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn gain_to_file(gain: &GainSpec) -> Result<GainFile, SchemaError> {
    Ok(match gain {
        GainSpec::Zero => GainFile::Zero,
        GainSpec::Linear { slope } => GainFile::Linear { slope: *slope },
        GainSpec::Power { coef, exponent } => GainFile::Power {
            coef: *coef,
            exponent: *exponent,
        },
        GainSpec::LogExp { coef } => GainFile::LogExp { coef: *coef },
        GainSpec::Custom(_) => return Err(SchemaError::NotSerializable),
    })
}

fn gain_from_file(gain: &GainFile) -> Result<GainSpec, SchemaError> {
    Ok(match gain {
        GainFile::Zero => GainSpec::Zero,
        GainFile::Linear { slope } => GainSpec::linear(*slope)?,
        GainFile::Power { coef, exponent } => GainSpec::power(*coef, *exponent)?,
        GainFile::LogExp { coef } => GainSpec::log_exp(*coef)?,
    })
}

/// Echo of the effective solver configuration inside a result file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub norm: f64,
    pub kappa_h: f64,
    pub kappa_gamma: f64,
    pub kappa_0: f64,
    pub c: Vec<f64>,
    pub delta: f64,
    pub refine_factor: f64,
    pub dom_margin: f64,
    pub provable_delta: bool,
}

impl ConfigEcho {
    pub fn new(cfg: &SfpConfig, provable_delta: bool) -> Self {
        ConfigEcho {
            norm: cfg.norm,
            kappa_h: cfg.kappa_h,
            kappa_gamma: cfg.kappa_gamma,
            kappa_0: cfg.kappa_0,
            c: cfg.c.clone(),
            delta: cfg.delta,
            refine_factor: cfg.refine_factor,
            dom_margin: cfg.dom_margin,
            provable_delta,
        }
    }
}

/// Schema-tagged solver result: the decay point, its image, the
/// componentwise certificate margins and the run statistics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayResultFile {
    pub schema: String,
    pub w: Vec<f64>,
    pub gamma_w: Vec<f64>,
    pub margins: Vec<f64>,
    pub norm_w: f64,
    pub pivots: u64,
    pub refinements: u32,
    pub final_delta: f64,
    pub wall_ms: f64,
    pub config: ConfigEcho,
}

impl DecayResultFile {
    pub fn new(result: &DecayResult, cfg: &SfpConfig, provable_delta: bool) -> Self {
        DecayResultFile {
            schema: RESULT_SCHEMA.to_string(),
            w: result.w.clone(),
            gamma_w: result.gamma_w.clone(),
            margins: result.margins(),
            norm_w: crate::util::euclidean_norm(&result.w),
            pivots: result.pivots,
            refinements: result.refinements,
            final_delta: result.final_delta,
            wall_ms: result.wall_time.as_secs_f64() * 1e3,
            config: ConfigEcho::new(cfg, provable_delta),
        }
    }

    pub fn read(path: &Path) -> Result<Self, SchemaError> {
        let text = fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: DecayResultFile = serde_json::from_str(&text)?;
        if file.schema != RESULT_SCHEMA {
            return Err(SchemaError::UnsupportedSchema {
                got: file.schema,
                expected: RESULT_SCHEMA.to_string(),
            });
        }
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<(), SchemaError> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
