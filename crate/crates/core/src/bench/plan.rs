//! Declarative benchmark plans.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Shape;
use crate::noise::NoiseKind;
use crate::solver::AscentConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Momentum,
    /// Plain ascent; the alpha grid is ignored and alpha fixed to 1.
    Classical,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Momentum => "momentum",
            Method::Classical => "classical",
        })
    }
}

/// Field provider for a benchmark cell. `oracle` uses the cell's own shape
/// mesh; `learned:<path>` loads a trained model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FieldChoice {
    Oracle,
    Mls,
    Learned(PathBuf),
}

impl FromStr for FieldChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(FieldChoice::Oracle),
            "mls" => Ok(FieldChoice::Mls),
            _ => match s.strip_prefix("learned:") {
                Some(p) if !p.is_empty() => Ok(FieldChoice::Learned(p.into())),
                _ => Err(Error::invalid(format!(
                    "unknown field {s:?} (expected oracle, mls or learned:<model>)"
                ))),
            },
        }
    }
}

impl TryFrom<String> for FieldChoice {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FieldChoice> for String {
    fn from(f: FieldChoice) -> String {
        f.to_string()
    }
}

impl fmt::Display for FieldChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldChoice::Oracle => f.write_str("oracle"),
            FieldChoice::Mls => f.write_str("mls"),
            FieldChoice::Learned(p) => write!(f, "learned:{}", p.display()),
        }
    }
}

/// A benchmark grid. Every combination of the list-valued fields is one
/// cell. A noise level of 0 means the clean samples are denoised as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchPlan {
    pub seed: u64,
    pub repetitions: usize,
    pub n_points: usize,
    pub shapes: Vec<Shape>,
    pub noise_kinds: Vec<NoiseKind>,
    pub noise_levels: Vec<f64>,
    pub fields: Vec<FieldChoice>,
    pub methods: Vec<Method>,
    pub steps: Vec<usize>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub knn: Vec<usize>,
    /// Residual threshold for the outlier columns, in multiples of the
    /// per-axis noise scale.
    pub outlier_multiple: f64,
    /// Each denoise is timed this many times and the fastest run kept.
    pub timing_repeats: usize,
}

impl Default for BenchPlan {
    fn default() -> Self {
        let d = AscentConfig::default();
        BenchPlan {
            seed: 0,
            repetitions: 1,
            n_points: 10_000,
            shapes: vec![Shape::Sphere],
            noise_kinds: vec![NoiseKind::Gaussian],
            noise_levels: vec![0.02],
            fields: vec![FieldChoice::Mls],
            methods: vec![Method::Momentum, Method::Classical],
            steps: vec![d.steps],
            alphas: vec![d.alpha],
            betas: vec![d.beta],
            gammas: vec![d.gamma],
            knn: vec![4],
            outlier_multiple: 3.0,
            timing_repeats: 1,
        }
    }
}

/// One (shape, noise, repetition) combination: the clean and noisy clouds
/// are generated once per data cell and shared by all its runs.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCell {
    pub index: usize,
    pub shape: Shape,
    pub noise_kind: NoiseKind,
    pub noise_level: f64,
    pub repetition: usize,
    pub seed: u64,
}

/// One denoising run within a data cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCell {
    pub field: FieldChoice,
    pub knn: usize,
    pub method: Method,
    pub config: AscentConfig,
}

impl BenchPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: BenchPlan = toml::from_str(text).map_err(|e| Error::invalid(format!("bad plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidInput(m) => Error::invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("shapes", self.shapes.len()),
            ("noise_kinds", self.noise_kinds.len()),
            ("noise_levels", self.noise_levels.len()),
            ("fields", self.fields.len()),
            ("methods", self.methods.len()),
            ("steps", self.steps.len()),
            ("alphas", self.alphas.len()),
            ("betas", self.betas.len()),
            ("gammas", self.gammas.len()),
            ("knn", self.knn.len()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, n)| *n == 0) {
            return Err(Error::invalid(format!("plan grid {name} is empty")));
        }
        if self.repetitions == 0 || self.n_points < 2 || self.timing_repeats == 0 {
            return Err(Error::invalid(
                "repetitions and timing_repeats must be >= 1, n_points >= 2",
            ));
        }
        if let Some(l) = self.noise_levels.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(Error::invalid(format!("noise level {l} must be finite and >= 0")));
        }
        if !(self.outlier_multiple > 0.0 && self.outlier_multiple.is_finite()) {
            return Err(Error::invalid("outlier_multiple must be positive"));
        }
        if self.knn.contains(&0) {
            return Err(Error::invalid("knn values must be >= 1"));
        }
        for cell in self.run_cells() {
            cell.config.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the plan's canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("plan serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn data_cells(&self) -> Vec<DataCell> {
        let mut cells = Vec::new();
        for shape in &self.shapes {
            for &noise_kind in &self.noise_kinds {
                for &noise_level in &self.noise_levels {
                    for repetition in 0..self.repetitions {
                        let index = cells.len();
                        cells.push(DataCell {
                            index,
                            shape: shape.clone(),
                            noise_kind,
                            noise_level,
                            repetition,
                            seed: derive_seed(self.seed, index as u64),
                        });
                    }
                }
            }
        }
        cells
    }

    /// Runs applied to every data cell, in output order.
    pub fn run_cells(&self) -> Vec<RunCell> {
        let mut cells = Vec::new();
        for field in &self.fields {
            for &knn in &self.knn {
                for &method in &self.methods {
                    let alphas: &[f64] = match method {
                        Method::Momentum => &self.alphas,
                        Method::Classical => &[1.0],
                    };
                    for &steps in &self.steps {
                        for &alpha in alphas {
                            for &beta in &self.betas {
                                for &gamma in &self.gammas {
                                    cells.push(RunCell {
                                        field: field.clone(),
                                        knn,
                                        method,
                                        config: AscentConfig { steps, alpha, beta, gamma },
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

/// SplitMix64 mix of `(seed, stream)`, used to give every data cell its own
/// independent seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
