use rayon::prelude::*;

use super::pca::LocalFrame;
use super::GradientField;
use crate::geometry::{NeighborGraph, PointCloud};
use crate::{Error, Result, Vec3};

/// Training-free field: each anchor carries a plane fitted by PCA over
/// itself and its neighbors, and answers with the displacement that
/// projects `x` onto that plane.
#[derive(Debug, Clone)]
pub struct MlsField {
    centroids: Vec<Vec3>,
    normals: Vec<Vec3>,
}

impl MlsField {
    pub fn centroid(&self, i: usize) -> Vec3 {
        self.centroids[i]
    }

    /// Unit plane normal, oriented away from the cloud centroid.
    pub fn normal(&self, i: usize) -> Vec3 {
        self.normals[i]
    }

    /// `((x - c_i) · n_i) (-n_i)`; independent of the normal's sign.
    pub fn mls_query(&self, i: usize, x: &Vec3) -> Result<Vec3> {
        if i >= self.centroids.len() {
            return Err(Error::invalid(format!("anchor {i} out of range ({})", self.centroids.len())));
        }
        let n = self.normals[i];
        Ok(-n * (x - self.centroids[i]).dot(&n))
    }
}

impl GradientField for MlsField {
    fn len(&self) -> usize {
        self.centroids.len()
    }

    fn query(&self, anchor: usize, x: &Vec3) -> Result<Vec3> {
        self.mls_query(anchor, x)
    }
}

/// Fits one local plane per anchor over `{x_i} ∪ kNN(i)`.
pub fn build_mls_field(cloud: &PointCloud, graph: &NeighborGraph) -> Result<MlsField> {
    if graph.k() < 3 {
        return Err(Error::invalid(format!(
            "local planes need k >= 3 neighbors, graph has k = {}",
            graph.k()
        )));
    }
    if graph.len() != cloud.len() {
        return Err(Error::invalid("neighbor graph was built over a different cloud"));
    }
    let pts = cloud.points();
    let center = cloud.centroid();
    let (centroids, normals): (Vec<Vec3>, Vec<Vec3>) = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let frame = LocalFrame::fit(std::iter::once(&pts[i]).chain(graph.neighbors(i).iter().map(|&j| &pts[j])));
            let mut n = frame.normal();
            if n.dot(&(pts[i] - center)) < 0.0 {
                n = -n;
            }
            (frame.centroid, n)
        })
        .unzip();
    Ok(MlsField { centroids, normals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_knn_graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn exact_plane() {
        let cloud = plane_cloud(200, 1);
        let g = build_knn_graph(&cloud, 8).unwrap();
        let field = build_mls_field(&cloud, &g).unwrap();
        for i in 0..cloud.len() {
            assert!((field.normal(i).z.abs() - 1.0).abs() < 1e-12);
            assert_eq!(field.centroid(i).z, 0.0);
            // on-surface queries vanish
            assert!(field.mls_query(i, &cloud.points()[i]).unwrap().norm() <= 1e-9);
            assert!(field.mls_query(i, &Vec3::new(0.4, -0.3, 0.0)).unwrap().norm() <= 1e-9);
        }
        let g = field.mls_query(0, &Vec3::new(0.0, 0.0, 0.5)).unwrap();
        assert!((g - Vec3::new(0.0, 0.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn requires_three_neighbors() {
        let cloud = plane_cloud(20, 2);
        let g = build_knn_graph(&cloud, 2).unwrap();
        assert!(matches!(build_mls_field(&cloud, &g), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn queries_are_pure() {
        let cloud = plane_cloud(50, 3);
        let g = build_knn_graph(&cloud, 4).unwrap();
        let field = build_mls_field(&cloud, &g).unwrap();
        let x = Vec3::new(0.123, 0.456, 0.789);
        let first = field.query(7, &x).unwrap();
        for _ in 0..1000 {
            assert_eq!(field.query(7, &x).unwrap(), first);
        }
        assert!(field.query(50, &x).is_err());
    }
}
