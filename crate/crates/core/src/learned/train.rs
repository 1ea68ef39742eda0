//! Displacement-regression trainer.
//!
//! Each epoch draws `samples_per_anchor` positions around every anchor from
//! an isotropic Gaussian of width `sigma_s · r` (`r` the noisy cloud's
//! bounding radius), labels each with the true displacement to the clean
//! reference, shuffles, and runs plain minibatch SGD on the mean squared
//! error. Everything is single-threaded except target lookup, whose results
//! are collected in order, so a fixed seed reproduces the run bit for bit.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{extract_all_features, loss_and_grad, PerceptronParams, Sample, FEATURE_DIM};
use crate::fields::oracle_query;
use crate::geometry::{build_knn_graph, KdTree, PointCloud, TriMesh};
use crate::{Error, Result, Vec3};

/// What the noisy cloud should be pulled towards.
#[derive(Debug, Clone)]
pub enum CleanReference {
    /// Exact nearest-surface displacement.
    Mesh(Arc<TriMesh>),
    /// Displacement to the nearest clean point.
    Cloud(Arc<KdTree>),
}

impl CleanReference {
    pub fn from_cloud(clean: &PointCloud) -> Self {
        CleanReference::Cloud(Arc::new(KdTree::new(clean.points())))
    }

    pub fn target(&self, x: &Vec3) -> Result<Vec3> {
        match self {
            CleanReference::Mesh(mesh) => oracle_query(mesh, x),
            CleanReference::Cloud(tree) => {
                let nb = tree
                    .nearest(x)
                    .ok_or_else(|| Error::invalid("clean reference cloud is empty"))?;
                Ok(tree.points()[nb.index] - x)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Width of the sampling Gaussian, as a fraction of the bounding radius.
    pub sigma_s: f64,
    pub samples_per_anchor: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    /// Neighborhood size for feature extraction.
    pub fit_k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            sigma_s: 0.03,
            samples_per_anchor: 16,
            learning_rate: 0.1,
            epochs: 20,
            batch_size: 32,
            seed: 0,
            hidden: vec![64, 64],
            fit_k: 48,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_s > 0.0 && self.sigma_s.is_finite()) {
            return Err(Error::invalid("sigma_s must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be finite and nonnegative"));
        }
        if self.samples_per_anchor == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("samples_per_anchor, epochs and batch_size must be positive"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::invalid("hidden layers must be nonempty"));
        }
        if self.fit_k < 3 {
            return Err(Error::invalid("fit_k must be at least 3"));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![3 + FEATURE_DIM];
        sizes.extend(&self.hidden);
        sizes.push(3);
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-sample squared error over the epoch's minibatches.
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub params: PerceptronParams,
    pub log: Vec<EpochStats>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trains a perceptron field on `noisy` against `reference`.
pub fn train_field(reference: &CleanReference, noisy: &PointCloud, config: &TrainConfig) -> Result<TrainedModel> {
    config.validate()?;
    let radius = match noisy.bounding_radius() {
        r if r > 0.0 => r,
        _ => 1.0,
    };
    let graph = build_knn_graph(noisy, config.fit_k)?;
    let features = extract_all_features(noisy, &graph)?;
    let sigma = config.sigma_s * radius;

    let mut shift = vec![0.0; 3];
    let mut scale = vec![sigma; 3];
    for d in 0..FEATURE_DIM {
        let (m, s) = mean_std(features.iter().map(|f| f.0[d]));
        shift.push(m);
        scale.push(if s > 1e-12 { s } else { 1.0 });
    }
    let mut params = PerceptronParams::init(&config.layer_sizes(), config.seed)?;
    params.set_normalization(shift, scale, sigma)?;
    params.set_feature_k(config.fit_k);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let anchors = noisy.points();
    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let draws: Vec<(usize, Vec3)> = (0..anchors.len())
            .flat_map(|i| std::iter::repeat_n(i, config.samples_per_anchor))
            .map(|i| {
                let rel = Vec3::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ) * sigma;
                (i, rel)
            })
            .collect();
        let mut samples: Vec<Sample> = draws
            .par_iter()
            .map(|&(i, rel)| {
                Ok(Sample {
                    relpos: rel,
                    feature: features[i],
                    target: reference.target(&(anchors[i] + rel))?,
                })
            })
            .collect::<Result<_>>()?;
        samples.shuffle(&mut rng);

        let mut total = 0.0;
        for batch in samples.chunks(config.batch_size) {
            let (loss, grad) = loss_and_grad(&params, batch)?;
            total += loss * batch.len() as f64;
            for (v, g) in params.values_mut().iter_mut().zip(&grad) {
                *v -= config.learning_rate * g;
            }
        }
        let loss = total / samples.len() as f64;
        if !loss.is_finite() || !params.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        log::info!("epoch {epoch}: loss {loss:.6e}");
        log.push(EpochStats { epoch, loss });
    }
    Ok(TrainedModel { params, log })
}
