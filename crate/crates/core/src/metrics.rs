//! Chamfer and point-to-mesh distances.
//!
//! Both metrics use squared Euclidean distances:
//!
//! - `CD(A, B) = mean_{a∈A} min_{b∈B} |a − b|² + mean_{b∈B} min_{a∈A} |a − b|²`
//! - `P2M(P, M) = mean_{p∈P} min_{q∈M} |p − q|²`, `q` ranging over the
//!   triangle surfaces.
//!
//! Values are stored raw. Tables conventionally show them multiplied by
//! 10⁴; that scaling is applied only by [`MetricReport::cd_display`] and
//! friends. Per-point terms may be computed in parallel but are always
//! summed sequentially in point order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{KdTree, PointCloud, TriMesh};
use crate::{Error, Result};

/// Multiplier used when presenting metric values.
pub const DISPLAY_SCALE: f64 = 1e4;

pub const CD_DEFINITION: &str =
    "mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2 (squared distances, per-side means, summed)";
pub const P2M_DEFINITION: &str = "mean_p min_face |p-q|^2 (squared, point-to-face direction only)";

fn ordered_mean(values: Vec<f64>) -> f64 {
    let n = values.len() as f64;
    values.into_iter().sum::<f64>() / n
}

fn one_sided(from: &PointCloud, to: &KdTree) -> f64 {
    let d: Vec<f64> = from
        .points()
        .par_iter()
        .map(|p| to.nearest(p).map_or(f64::INFINITY, |n| n.dist2))
        .collect();
    ordered_mean(d)
}

pub fn chamfer_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Chamfer distance needs two nonempty clouds"));
    }
    let ta = KdTree::new(a.points());
    let tb = KdTree::new(b.points());
    Ok(one_sided(a, &tb) + one_sided(b, &ta))
}

/// Squared distance from every point to the mesh surface, in point order.
pub fn surface_distances2(cloud: &PointCloud, mesh: &TriMesh) -> Result<Vec<f64>> {
    if mesh.is_empty() {
        return Err(Error::invalid("mesh has no faces"));
    }
    cloud
        .points()
        .par_iter()
        .map(|p| mesh.nearest(p).map(|h| h.dist2))
        .collect()
}

pub fn point_to_mesh(cloud: &PointCloud, mesh: &TriMesh) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::invalid("point-to-mesh needs a nonempty cloud"));
    }
    Ok(ordered_mean(surface_distances2(cloud, mesh)?))
}

/// Fraction of points whose distance to the mesh exceeds `threshold`.
pub fn outlier_fraction(cloud: &PointCloud, mesh: &TriMesh, threshold: f64) -> Result<f64> {
    let d = surface_distances2(cloud, mesh)?;
    let t2 = threshold * threshold;
    Ok(d.iter().filter(|&&v| v > t2).count() as f64 / d.len() as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub denoised: Option<String>,
    pub clean: Option<String>,
    pub mesh: Option<String>,
    pub config_hash: Option<String>,
}

/// Raw metric values plus enough metadata to interpret them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub cd: f64,
    pub p2m: Option<f64>,
    pub n_points: usize,
    /// Factor applied by the display helpers; stored values are raw.
    pub display_scale: f64,
    pub cd_definition: String,
    pub p2m_definition: String,
    pub provenance: Provenance,
}

impl MetricReport {
    /// Computes CD against `clean` and, when a mesh is given, P2M.
    pub fn compute(denoised: &PointCloud, clean: &PointCloud, mesh: Option<&TriMesh>, provenance: Provenance) -> Result<Self> {
        let cd = chamfer_distance(denoised, clean)?;
        let p2m = mesh.map(|m| point_to_mesh(denoised, m)).transpose()?;
        Ok(MetricReport {
            cd,
            p2m,
            n_points: denoised.len(),
            display_scale: DISPLAY_SCALE,
            cd_definition: CD_DEFINITION.to_owned(),
            p2m_definition: P2M_DEFINITION.to_owned(),
            provenance,
        })
    }

    pub fn cd_display(&self) -> f64 {
        self.cd * self.display_scale
    }

    pub fn p2m_display(&self) -> Option<f64> {
        self.p2m.map(|v| v * self.display_scale)
    }
}
