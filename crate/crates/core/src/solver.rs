//! Momentum gradient ascent over a gradient field.
//!
//! Starting from the noisy positions with zero velocity, each step
//! `t = 1..=T` evaluates the ensemble gradient `z_i` at every point's
//! current position and applies
//!
//! ```text
//! v_i ← α z_i + (1 − α) v_i
//! x_i ← x_i + β γ^t v_i
//! ```
//!
//! All gradients of a step are evaluated at the previous step's positions
//! before any point moves, so the result does not depend on evaluation
//! order or thread count. `α = 1` reduces the velocity to the current
//! gradient, which is classical gradient ascent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{ensemble_gradient, GradientField};
use crate::geometry::{NeighborGraph, PointCloud};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    /// Total number of steps `T`.
    pub steps: usize,
    /// Momentum weight, in `(0, 1]`.
    pub alpha: f64,
    /// Step size.
    pub beta: f64,
    /// Per-step decay factor, in `(0, 1]`.
    pub gamma: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            steps: 15,
            alpha: 0.9,
            beta: 0.2,
            gamma: 0.95,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("steps must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    /// Same configuration with `alpha = 1`.
    pub fn classical(self) -> Self {
        AscentConfig { alpha: 1.0, ..self }
    }

    /// `β γ^t` for a 1-based step `t`.
    pub fn step_scale(&self, t: usize) -> f64 {
        self.beta * self.gamma.powi(t as i32)
    }
}

/// Positions, velocities and the number of completed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentState {
    positions: Vec<Vec3>,
    velocities: Vec<Vec3>,
    t: usize,
}

impl AscentState {
    pub fn new(positions: Vec<Vec3>) -> Self {
        let velocities = vec![Vec3::zeros(); positions.len()];
        AscentState {
            positions,
            velocities,
            t: 0,
        }
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn velocities(&self) -> &[Vec3] {
        &self.velocities
    }

    pub fn step(&self) -> usize {
        self.t
    }

    pub fn into_positions(self) -> Vec<Vec3> {
        self.positions
    }
}

/// Applies one momentum update with gradients evaluated at the state's
/// current positions.
pub fn momentum_step(mut state: AscentState, gradients: &[Vec3], config: &AscentConfig) -> Result<AscentState> {
    if state.t >= config.steps {
        return Err(Error::invalid(format!(
            "state already completed {} of {} steps",
            state.t, config.steps
        )));
    }
    if gradients.len() != state.positions.len() {
        return Err(Error::invalid(format!(
            "{} gradients for {} points",
            gradients.len(),
            state.positions.len()
        )));
    }
    let t = state.t + 1;
    if let Some(index) = gradients.iter().position(|g| !g.iter().all(|c| c.is_finite())) {
        return Err(Error::NonFiniteGradient { index, step: t });
    }
    let scale = config.step_scale(t);
    let alpha = config.alpha;
    for ((x, v), z) in state.positions.iter_mut().zip(state.velocities.iter_mut()).zip(gradients) {
        *v = if alpha == 1.0 { *z } else { z * alpha + *v * (1.0 - alpha) };
        *x += *v * scale;
    }
    state.t = t;
    Ok(state)
}

/// Per-step summary written to traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub step: usize,
    pub mean_gradient_norm: f64,
    pub max_gradient_norm: f64,
    pub mean_displacement: f64,
    pub max_displacement: f64,
}

/// Recorded run: `snapshots[t]` are the positions after step `t`
/// (`snapshots[0]` is the input), `steps[t - 1]` summarizes step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Vec<Vec3>>,
    pub steps: Vec<StepStats>,
}

fn mean_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (n, sum, max) = values.fold((0usize, 0.0, 0.0f64), |(n, s, m), v| (n + 1, s + v, m.max(v)));
    (sum / n as f64, max)
}

/// Denoises `cloud` with `T` momentum steps over the ensemble of `field`.
///
/// `field` and `graph` must have been built from `cloud`. If the cloud
/// carries a normalization transform, the result is mapped back to the
/// original frame.
pub fn denoise<F>(
    cloud: &PointCloud,
    field: &F,
    graph: &NeighborGraph,
    config: &AscentConfig,
    record: bool,
) -> Result<(PointCloud, Option<Trajectory>)>
where
    F: GradientField + ?Sized,
{
    config.validate()?;
    if field.len() != cloud.len() || graph.len() != cloud.len() {
        return Err(Error::invalid(format!(
            "cloud has {} points but field has {} anchors and graph {} rows",
            cloud.len(),
            field.len(),
            graph.len()
        )));
    }
    let mut state = AscentState::new(cloud.points().to_vec());
    let mut trajectory = record.then(|| Trajectory {
        snapshots: vec![state.positions.clone()],
        steps: Vec::with_capacity(config.steps),
    });
    while state.t < config.steps {
        let gradients: Vec<Vec3> = state
            .positions
            .par_iter()
            .enumerate()
            .map(|(i, x)| ensemble_gradient(field, graph, i, x))
            .collect::<Result<_>>()?;
        let before = record.then(|| state.positions.clone());
        state = momentum_step(state, &gradients, config)?;
        if let (Some(traj), Some(before)) = (trajectory.as_mut(), before) {
            let (mean_g, max_g) = mean_max(gradients.iter().map(|g| g.norm()));
            let (mean_d, max_d) = mean_max(state.positions.iter().zip(&before).map(|(a, b)| (a - b).norm()));
            traj.steps.push(StepStats {
                step: state.t,
                mean_gradient_norm: mean_g,
                max_gradient_norm: max_g,
                mean_displacement: mean_d,
                max_displacement: max_d,
            });
            traj.snapshots.push(state.positions.clone());
        }
    }
    let out = PointCloud::new(state.into_positions())?
        .with_transform(cloud.transform().copied())
        .denormalized();
    Ok((out, trajectory))
}

/// Classical gradient ascent: [`denoise`] with `alpha` forced to 1.
pub fn classical_denoise<F>(
    cloud: &PointCloud,
    field: &F,
    graph: &NeighborGraph,
    config: &AscentConfig,
    record: bool,
) -> Result<(PointCloud, Option<Trajectory>)>
where
    F: GradientField + ?Sized,
{
    denoise(cloud, field, graph, &config.classical(), record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_knn_graph, normalize};

    struct Constant(usize, Vec3);

    impl GradientField for Constant {
        fn len(&self) -> usize {
            self.0
        }
        fn query(&self, _: usize, _: &Vec3) -> Result<Vec3> {
            Ok(self.1)
        }
    }

    /// Pulls every query towards the plane z = 0.
    struct ToPlane(usize);

    impl GradientField for ToPlane {
        fn len(&self) -> usize {
            self.0
        }
        fn query(&self, _: usize, x: &Vec3) -> Result<Vec3> {
            Ok(Vec3::new(0.0, 0.0, -x.z))
        }
    }

    struct Broken(usize);

    impl GradientField for Broken {
        fn len(&self) -> usize {
            self.0
        }
        fn query(&self, anchor: usize, _: &Vec3) -> Result<Vec3> {
            Ok(if anchor == 2 { Vec3::new(f64::NAN, 0.0, 0.0) } else { Vec3::zeros() })
        }
    }

    #[test]
    fn first_velocity_update() {
        let state = AscentState::new(vec![Vec3::zeros()]);
        let config = AscentConfig::default();
        let next = momentum_step(state, &[Vec3::x()], &config).unwrap();
        assert_eq!(next.velocities()[0], Vec3::new(0.9, 0.0, 0.0));
        assert_eq!(next.step(), 1);
        // displacement 0.2 * 0.95 * 0.9
        assert!((next.positions()[0].x - 0.171).abs() < 1e-15);
    }

    #[test]
    fn zero_field_never_moves() {
        let pts = vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 0.0)];
        let mut state = AscentState::new(pts.clone());
        let config = AscentConfig::default();
        for _ in 0..config.steps {
            state = momentum_step(state, &[Vec3::zeros(); 2], &config).unwrap();
        }
        assert_eq!(state.positions(), pts.as_slice());
        assert!(state.velocities().iter().all(|v| *v == Vec3::zeros()));
        assert!(momentum_step(state, &[Vec3::zeros(); 2], &config).is_err());
    }

    #[test]
    fn alpha_one_uses_current_gradient() {
        let config = AscentConfig { alpha: 1.0, ..AscentConfig::default() };
        let mut state = AscentState::new(vec![Vec3::zeros()]);
        let zs = [Vec3::x(), Vec3::y() * 3.0, Vec3::new(-1.0, 0.5, 2.0)];
        let mut x = Vec3::zeros();
        for (t, z) in zs.iter().enumerate() {
            state = momentum_step(state, &[*z], &config).unwrap();
            assert_eq!(state.velocities()[0], *z);
            x += z * (0.2 * 0.95f64.powi(t as i32 + 1));
            assert_eq!(state.positions()[0], x);
        }
    }

    #[test]
    fn nan_gradient_names_point() {
        let state = AscentState::new(vec![Vec3::zeros(); 3]);
        let grads = [Vec3::zeros(), Vec3::zeros(), Vec3::new(0.0, f64::INFINITY, 0.0)];
        let err = momentum_step(state, &grads, &AscentConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { index: 2, step: 1 }));
    }

    #[test]
    fn denoise_propagates_field_errors() {
        let cloud = PointCloud::from_arrays(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]]).unwrap();
        let graph = build_knn_graph(&cloud, 2).unwrap();
        assert!(matches!(
            denoise(&cloud, &Broken(4), &graph, &AscentConfig::default(), false),
            Err(Error::NonFiniteGradient { .. })
        ));
        assert!(denoise(&cloud, &Broken(5), &graph, &AscentConfig::default(), false).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = AscentConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            AscentConfig { steps: 0, ..ok },
            AscentConfig { alpha: 0.0, ..ok },
            AscentConfig { alpha: 1.1, ..ok },
            AscentConfig { beta: 0.0, ..ok },
            AscentConfig { gamma: 1.5, ..ok },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn trajectory_shape_and_constant_field_displacement() {
        let cloud = PointCloud::from_arrays(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let graph = build_knn_graph(&cloud, 2).unwrap();
        let v = Vec3::new(0.0, 0.0, 1.0);
        let config = AscentConfig { alpha: 1.0, ..AscentConfig::default() };
        let (out, traj) = denoise(&cloud, &Constant(3, v), &graph, &config, true).unwrap();
        let traj = traj.unwrap();
        assert_eq!(traj.snapshots.len(), config.steps + 1);
        assert_eq!(traj.steps.len(), config.steps);
        let total: f64 = (1..=config.steps).map(|t| config.step_scale(t)).sum();
        assert!((out.points()[0].z - total).abs() < 1e-12);
        assert!((traj.steps[0].mean_displacement - config.step_scale(1)).abs() < 1e-15);
    }

    #[test]
    fn result_is_denormalized() {
        let raw = PointCloud::from_arrays(&[
            [10.0, 10.0, 12.0],
            [14.0, 10.0, 8.0],
            [10.0, 14.0, 11.0],
            [14.0, 14.0, 9.0],
        ])
        .unwrap();
        let (cloud, t) = normalize(&raw).unwrap();
        let graph = build_knn_graph(&cloud, 2).unwrap();
        let (out, _) = denoise(&cloud, &ToPlane(4), &graph, &AscentConfig::default(), false).unwrap();
        assert!(out.transform().is_none());
        for (o, r) in out.points().iter().zip(raw.points()) {
            // x, y untouched in the normalized frame, so unchanged here
            assert!((o.x - r.x).abs() < 1e-12 && (o.y - r.y).abs() < 1e-12);
            assert!((o.z - t.center.z).abs() < (r.z - t.center.z).abs());
        }
    }
}
