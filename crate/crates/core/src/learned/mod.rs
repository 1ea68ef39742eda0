//! Small perceptron gradient estimator and its trainer.
//!
//! The estimator for anchor `i` is `g_i(x) = G(x - x_i, f_i)`, where `G`
//! is an MLP and `f_i` a hand-crafted [`LocalFeature`] of the anchor's
//! neighborhood. It is trained to regress the displacement from noisy
//! sample positions to the clean surface.

mod features;
mod mlp;
mod train;

use std::sync::Arc;

pub use features::{extract_all_features, extract_features, LocalFeature, FEATURE_DIM};
pub use mlp::{input_gradient, loss_and_grad, mlp_forward, PerceptronParams, Sample};
pub use train::{train_field, CleanReference, EpochStats, TrainConfig, TrainedModel};

use crate::fields::GradientField;
use crate::geometry::{build_knn_graph, NeighborGraph, PointCloud};
use crate::{Error, Result, Vec3};

/// Trained parameters bound to the anchors and features of one cloud.
#[derive(Debug, Clone)]
pub struct LearnedField {
    params: Arc<PerceptronParams>,
    anchors: Vec<Vec3>,
    features: Vec<LocalFeature>,
}

impl LearnedField {
    /// Extracts features for every anchor over `graph` (which must have
    /// `k >= 3`).
    pub fn new(params: Arc<PerceptronParams>, cloud: &PointCloud, graph: &NeighborGraph) -> Result<Self> {
        if params.feature_dim() != FEATURE_DIM {
            return Err(Error::invalid(format!(
                "model expects {} features, extractor produces {FEATURE_DIM}",
                params.feature_dim()
            )));
        }
        let features = extract_all_features(cloud, graph)?;
        Ok(LearnedField {
            params,
            anchors: cloud.points().to_vec(),
            features,
        })
    }

    /// Like [`LearnedField::new`], but extracts features over the
    /// neighborhood size recorded in the model when it differs from
    /// `graph`'s.
    pub fn for_cloud(params: Arc<PerceptronParams>, cloud: &PointCloud, graph: &NeighborGraph) -> Result<Self> {
        match params.feature_k() {
            k if k == 0 || k == graph.requested_k() => Self::new(params, cloud, graph),
            k => {
                let feature_graph = build_knn_graph(cloud, k)?;
                Self::new(params, cloud, &feature_graph)
            }
        }
    }

    pub fn params(&self) -> &PerceptronParams {
        &self.params
    }

    pub fn feature(&self, i: usize) -> &LocalFeature {
        &self.features[i]
    }

    /// `G(x - x_i, f_i)`.
    pub fn learned_query(&self, i: usize, x: &Vec3) -> Result<Vec3> {
        let anchor = self
            .anchors
            .get(i)
            .ok_or_else(|| Error::invalid(format!("anchor {i} out of range ({})", self.anchors.len())))?;
        mlp_forward(&self.params, &(x - anchor), self.features[i].as_slice())
    }
}

impl GradientField for LearnedField {
    fn len(&self) -> usize {
        self.anchors.len()
    }

    fn query(&self, anchor: usize, x: &Vec3) -> Result<Vec3> {
        self.learned_query(anchor, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud() -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        PointCloud::new((0..60).map(|_| Vec3::new(rng.random(), rng.random(), rng.random::<f64>() * 0.1)).collect())
            .unwrap()
    }

    #[test]
    fn zero_params_give_zero() {
        let c = cloud();
        let g = build_knn_graph(&c, 6).unwrap();
        let p = Arc::new(PerceptronParams::zeros(&[3 + FEATURE_DIM, 8, 3]).unwrap());
        let f = LearnedField::new(p, &c, &g).unwrap();
        assert_eq!(f.learned_query(3, &Vec3::new(5.0, 1.0, 2.0)).unwrap(), Vec3::zeros());
    }

    #[test]
    fn identity_net_vanishes_at_anchor() {
        let c = cloud();
        let g = build_knn_graph(&c, 6).unwrap();
        let mut p = PerceptronParams::zeros(&[3 + FEATURE_DIM, 3]).unwrap();
        for k in 0..3 {
            p.values_mut()[k * (3 + FEATURE_DIM) + k] = 1.0;
        }
        let f = LearnedField::new(Arc::new(p), &c, &g).unwrap();
        for i in 0..c.len() {
            assert_eq!(f.learned_query(i, &c.points()[i]).unwrap(), Vec3::zeros());
        }
    }

    #[test]
    fn query_is_forward_composition() {
        let c = cloud();
        let g = build_knn_graph(&c, 6).unwrap();
        let p = Arc::new(PerceptronParams::init(&[3 + FEATURE_DIM, 10, 10, 3], 9).unwrap());
        let f = LearnedField::new(p.clone(), &c, &g).unwrap();
        let feats = extract_all_features(&c, &g).unwrap();
        let x = Vec3::new(0.2, 0.9, -0.4);
        for (i, (anchor, feat)) in c.points().iter().zip(&feats).enumerate() {
            let direct = mlp_forward(&p, &(x - anchor), feat.as_slice()).unwrap();
            assert_eq!(f.query(i, &x).unwrap(), direct);
        }
        assert!(f.query(c.len(), &x).is_err());
    }

    #[test]
    fn recorded_feature_k_is_used() {
        let c = cloud();
        let g4 = build_knn_graph(&c, 4).unwrap();
        let g9 = build_knn_graph(&c, 9).unwrap();
        let mut p = PerceptronParams::init(&[3 + FEATURE_DIM, 6, 3], 2).unwrap();
        p.set_feature_k(9);
        let p = Arc::new(p);
        let f = LearnedField::for_cloud(p.clone(), &c, &g4).unwrap();
        let direct = LearnedField::new(p, &c, &g9).unwrap();
        for i in 0..c.len() {
            assert_eq!(f.feature(i), direct.feature(i));
        }
    }

    #[test]
    fn feature_width_checked() {
        let c = cloud();
        let g = build_knn_graph(&c, 6).unwrap();
        let p = Arc::new(PerceptronParams::zeros(&[5, 3]).unwrap());
        assert!(LearnedField::new(p, &c, &g).is_err());
    }
}
