//! Reproducible synthetic noise.
//!
//! A noise level is a fraction of the cloud's bounding-sphere radius `r`
//! (centroid-centered, farthest point): `level = 0.01` is "1% noise". The
//! resulting per-axis scale `s = level * r` parameterizes each family:
//!
//! | kind     | per-axis distribution | std dev      |
//! |----------|-----------------------|--------------|
//! | gaussian | Normal(0, s²)         | `s`          |
//! | laplace  | Laplace(0, b = s)     | `√2 · s`     |
//! | uniform  | Uniform(−s, s)        | `s / √3`     |
//!
//! Draws come from ChaCha8 seeded with [`SeedableRng::seed_from_u64`], three
//! per point in x, y, z order, so outputs are identical across platforms.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::PointCloud;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Laplace,
    Uniform,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::Gaussian, NoiseKind::Laplace, NoiseKind::Uniform];

    /// Per-axis standard deviation produced by scale parameter `s`.
    pub fn std_dev(self, s: f64) -> f64 {
        match self {
            NoiseKind::Gaussian => s,
            NoiseKind::Laplace => std::f64::consts::SQRT_2 * s,
            NoiseKind::Uniform => s / 3f64.sqrt(),
        }
    }

    fn sample(self, rng: &mut impl Rng, s: f64) -> f64 {
        match self {
            NoiseKind::Gaussian => s * rng.sample::<f64, _>(StandardNormal),
            NoiseKind::Laplace => {
                // inverse CDF on u in [-1/2, 1/2)
                let u: f64 = rng.random::<f64>() - 0.5;
                -s * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            NoiseKind::Uniform => rng.random_range(-s..s),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Laplace => "laplace",
            NoiseKind::Uniform => "uniform",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "laplace" => Ok(NoiseKind::Laplace),
            "uniform" => Ok(NoiseKind::Uniform),
            other => Err(Error::invalid(format!(
                "unknown noise kind {other:?} (expected gaussian, laplace or uniform)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, level: f64, seed: u64) -> Result<Self> {
        let spec = NoiseSpec { kind, level, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level.is_finite()) {
            return Err(Error::invalid(format!(
                "noise level must be positive and finite, got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// Per-axis noise scale for `cloud`: `level` times its bounding radius
/// (a zero-extent cloud counts as radius 1).
pub fn noise_scale(cloud: &PointCloud, level: f64) -> f64 {
    let r = cloud.bounding_radius();
    level * if r > 0.0 { r } else { 1.0 }
}

/// Adds independent per-axis noise to every point. Order and count are
/// preserved.
pub fn add_noise(cloud: &PointCloud, spec: &NoiseSpec) -> Result<PointCloud> {
    spec.validate()?;
    let s = noise_scale(cloud, spec.level);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let points = cloud
        .points()
        .iter()
        .map(|p| {
            let dx = spec.kind.sample(&mut rng, s);
            let dy = spec.kind.sample(&mut rng, s);
            let dz = spec.kind.sample(&mut rng, s);
            p + Vec3::new(dx, dy, dz)
        })
        .collect();
    PointCloud::new(points)
}
