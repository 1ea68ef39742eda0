use crate::fields::pca::LocalFrame;
use crate::geometry::{NeighborGraph, PointCloud};
use crate::{Error, Result, Vec3};

/// Number of entries in a [`LocalFeature`].
pub const FEATURE_DIM: usize = 8;

/// Hand-crafted per-anchor descriptor fed to the perceptron next to the
/// relative query position.
///
/// Layout:
///
/// | idx | content                                                          |
/// |-----|------------------------------------------------------------------|
/// | 0-2 | covariance eigenvalues, descending, divided by their sum         |
/// | 3   | mean neighbor distance / cloud bounding radius                   |
/// | 4-6 | normal axis (least-variance eigenvector), largest component > 0  |
/// | 7   | `(x_i - c_i) · n_i` / bounding radius, `c_i` the patch centroid  |
///
/// Entry 7 tells the network how far off its own local plane the anchor
/// sits, which the relative position alone cannot reveal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFeature(pub [f64; FEATURE_DIM]);

impl LocalFeature {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn density(&self) -> f64 {
        self.0[3]
    }

    pub fn axis(&self) -> Vec3 {
        Vec3::new(self.0[4], self.0[5], self.0[6])
    }

    pub fn plane_offset(&self) -> f64 {
        self.0[7]
    }
}

fn canonical_sign(v: Vec3) -> Vec3 {
    if v[v.iamax()] < 0.0 {
        -v
    } else {
        v
    }
}

/// Features for anchor `i` over the patch `{x_i} ∪ kNN(i)`.
pub fn extract_features(cloud: &PointCloud, graph: &NeighborGraph, i: usize) -> Result<LocalFeature> {
    extract_with_radius(cloud, graph, i, cloud.bounding_radius())
}

/// Features for every anchor of the cloud.
pub fn extract_all_features(cloud: &PointCloud, graph: &NeighborGraph) -> Result<Vec<LocalFeature>> {
    let radius = cloud.bounding_radius();
    (0..cloud.len()).map(|i| extract_with_radius(cloud, graph, i, radius)).collect()
}

fn extract_with_radius(cloud: &PointCloud, graph: &NeighborGraph, i: usize, radius: f64) -> Result<LocalFeature> {
    if graph.k() < 3 {
        return Err(Error::invalid(format!("features need k >= 3 neighbors, graph has k = {}", graph.k())));
    }
    if graph.len() != cloud.len() {
        return Err(Error::invalid("neighbor graph was built over a different cloud"));
    }
    if i >= cloud.len() {
        return Err(Error::invalid(format!("anchor {i} out of range ({})", cloud.len())));
    }
    let pts = cloud.points();
    let anchor = pts[i];
    let nbrs = graph.neighbors(i);
    let frame = LocalFrame::fit(std::iter::once(&anchor).chain(nbrs.iter().map(|&j| &pts[j])));
    let radius = if radius > 0.0 { radius } else { 1.0 };

    let [l0, l1, l2] = frame.eigenvalues;
    let total = l0 + l1 + l2;
    let eig = if total > 0.0 {
        [l2 / total, l1 / total, l0 / total]
    } else {
        [1.0 / 3.0; 3]
    };
    let density = nbrs.iter().map(|&j| (pts[j] - anchor).norm()).sum::<f64>() / nbrs.len() as f64 / radius;
    let n = canonical_sign(frame.normal());
    let offset = (anchor - frame.centroid).dot(&n) / radius;
    Ok(LocalFeature([eig[0], eig[1], eig[2], density, n.x, n.y, n.z, offset]))
}
