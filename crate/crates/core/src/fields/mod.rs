//! Gradient-field providers and the kNN ensemble combiner.
//!
//! A field answers "which way, and how far, to the surface" for a query
//! position `x` relative to one anchor point of the original noisy cloud.
//! Every provider is built once from that cloud and then stays fixed while
//! the ascent moves query positions around; anchors never move.

mod mls;
mod oracle;
pub mod pca;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use mls::{build_mls_field, MlsField};
pub use oracle::{oracle_query, OracleField};

use crate::geometry::NeighborGraph;
use crate::learned::LearnedField;
use crate::{Error, Result, Vec3};

/// Per-anchor gradient estimator `g_i(x)`.
///
/// Implementations are immutable after construction, so `query` is a pure
/// function and may be called from many threads at once.
pub trait GradientField: Send + Sync {
    /// Number of anchors (the size of the construction cloud).
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Displacement estimate at `x` from the model attached to anchor `i`.
    fn query(&self, anchor: usize, x: &Vec3) -> Result<Vec3>;
}

/// Ensemble gradient: the mean of the neighbors' estimates at `x`,
/// `z_i(x) = (1/k) Σ_{j ∈ kNN(i)} g_j(x)`.
///
/// The mean is accumulated incrementally, so `k` identical estimates
/// average to exactly that estimate.
pub fn ensemble_gradient<F>(field: &F, graph: &NeighborGraph, i: usize, x: &Vec3) -> Result<Vec3>
where
    F: GradientField + ?Sized,
{
    if field.len() != graph.len() {
        return Err(Error::invalid(format!(
            "field has {} anchors but the neighbor graph has {} points",
            field.len(),
            graph.len()
        )));
    }
    if i >= graph.len() {
        return Err(Error::invalid(format!("point index {i} out of range ({})", graph.len())));
    }
    let mut mean = Vec3::zeros();
    for (n, &j) in graph.neighbors(i).iter().enumerate() {
        let g = field.query(j, x)?;
        mean += (g - mean) / (n + 1) as f64;
    }
    Ok(mean)
}

/// Any of the built-in providers.
#[derive(Debug, Clone)]
pub enum FieldAtlas {
    Oracle(OracleField),
    Mls(MlsField),
    Learned(LearnedField),
}

impl FieldAtlas {
    pub fn provider_name(&self) -> &'static str {
        match self {
            FieldAtlas::Oracle(_) => "oracle",
            FieldAtlas::Mls(_) => "mls",
            FieldAtlas::Learned(_) => "learned",
        }
    }
}

impl GradientField for FieldAtlas {
    fn len(&self) -> usize {
        match self {
            FieldAtlas::Oracle(f) => f.len(),
            FieldAtlas::Mls(f) => f.len(),
            FieldAtlas::Learned(f) => f.len(),
        }
    }

    fn query(&self, anchor: usize, x: &Vec3) -> Result<Vec3> {
        match self {
            FieldAtlas::Oracle(f) => f.query(anchor, x),
            FieldAtlas::Mls(f) => f.query(anchor, x),
            FieldAtlas::Learned(f) => f.query(anchor, x),
        }
    }
}

/// Provider selection as written on the command line:
/// `oracle:<mesh.off>`, `mls`, or `learned:<model-file>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProviderSpec {
    Oracle(PathBuf),
    Mls,
    Learned(PathBuf),
}

impl FromStr for ProviderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("mls", None) => Ok(ProviderSpec::Mls),
            ("oracle", Some(p)) if !p.is_empty() => Ok(ProviderSpec::Oracle(p.into())),
            ("learned", Some(p)) if !p.is_empty() => Ok(ProviderSpec::Learned(p.into())),
            _ => Err(Error::invalid(format!(
                "bad field provider {s:?} (expected oracle:<mesh.off>, mls or learned:<model>)"
            ))),
        }
    }
}

impl fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProviderSpec::Oracle(p) => write!(f, "oracle:{}", p.display()),
            ProviderSpec::Mls => f.write_str("mls"),
            ProviderSpec::Learned(p) => write!(f, "learned:{}", p.display()),
        }
    }
}
