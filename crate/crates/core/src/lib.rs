//! Point cloud denoising by momentum gradient ascent over estimated gradient
//! fields.
//!
//! A noisy cloud is refined by moving every point along an ensemble of local
//! gradient estimates that point towards the underlying surface. The ascent
//! keeps a per-point velocity (a leaky average of past gradients) and scales
//! each step by a geometrically decaying factor, so the iteration settles in
//! a small, fixed number of steps. Classical gradient ascent is the special
//! case with momentum weight `alpha = 1`.
//!
//! The crate is organized as:
//!
//! - [`geometry`]: point clouds, triangle meshes, exact kNN and
//!   nearest-surface queries, XYZ/OFF I/O.
//! - [`noise`]: reproducible Gaussian, Laplace and uniform perturbations.
//! - [`fields`]: gradient-field providers (mesh oracle, local-plane MLS,
//!   learned perceptron) and the kNN ensemble combiner.
//! - [`learned`]: the small perceptron estimator, its features and trainer.
//! - [`solver`]: momentum and classical ascent.
//! - [`metrics`]: Chamfer and point-to-mesh distances.
//! - [`bench`]: the benchmark harness (noise grids, sweeps, timing).

pub mod bench;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod learned;
pub mod metrics;
pub mod noise;
pub mod solver;

pub use error::{Error, Result};

/// Three-component vector used for positions and gradients.
pub type Vec3 = nalgebra::Vector3<f64>;
