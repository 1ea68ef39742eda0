use rayon::prelude::*;

use super::{KdTree, PointCloud};
use crate::{Error, Result};

/// Per-point k-nearest-neighbor lists, self excluded, sorted by ascending
/// distance with ties broken by lower index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    k: usize,
    requested_k: usize,
    // flat, row-major: neighbors of i are at [i*k, (i+1)*k)
    neighbors: Vec<usize>,
}

impl NeighborGraph {
    /// Graph from explicit neighbor lists. Every row must have the same
    /// length, at least 1, and may not reference itself or an index out of
    /// range. Ordering within rows is kept as given.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if k == 0 {
            return Err(Error::invalid("neighbor rows must be nonempty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::invalid(format!("row {i} has {} neighbors, expected {k}", row.len())));
            }
            if row.iter().any(|&j| j >= n || j == i) {
                return Err(Error::invalid(format!("row {i} references itself or an out-of-range index")));
            }
        }
        Ok(NeighborGraph {
            k,
            requested_k: k,
            neighbors: rows.into_iter().flatten().collect(),
        })
    }

    /// Effective neighbor count per point, `min(requested, N - 1)`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn requested_k(&self) -> usize {
        self.requested_k
    }

    /// True when the requested `k` exceeded `N - 1` and was truncated.
    pub fn truncated(&self) -> bool {
        self.k < self.requested_k
    }

    pub fn len(&self) -> usize {
        self.neighbors.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.neighbors.chunks_exact(self.k)
    }
}

/// Exact kNN graph over the cloud.
pub fn build_knn_graph(cloud: &PointCloud, k: usize) -> Result<NeighborGraph> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let n = cloud.len();
    if n < 2 {
        return Err(Error::invalid("a neighbor graph needs at least 2 points"));
    }
    let effective = k.min(n - 1);
    if effective < k {
        log::warn!("k = {k} exceeds N - 1 = {}; truncated", n - 1);
    }
    let tree = KdTree::new(cloud.points());
    let rows: Vec<Vec<usize>> = cloud
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, p)| tree.knn(p, effective, Some(i)).into_iter().map(|nb| nb.index).collect())
        .collect();
    Ok(NeighborGraph {
        k: effective,
        requested_k: k,
        neighbors: rows.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_k1() {
        let cloud = PointCloud::from_arrays(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]]).unwrap();
        let g = build_knn_graph(&cloud, 1).unwrap();
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
        assert_eq!(g.neighbors(2), &[1]);
    }

    #[test]
    fn unit_square_edge_neighbors() {
        let cloud = PointCloud::from_arrays(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ])
        .unwrap();
        let g = build_knn_graph(&cloud, 2).unwrap();
        assert_eq!(g.neighbors(0), &[1, 3]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(2), &[1, 3]);
        assert_eq!(g.neighbors(3), &[0, 2]);
    }

    #[test]
    fn truncates_large_k() {
        let cloud = PointCloud::from_arrays(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]]).unwrap();
        let g = build_knn_graph(&cloud, 10).unwrap();
        assert!(g.truncated());
        assert_eq!(g.k(), 2);
        assert_eq!(g.neighbors(2), &[1, 0]);
    }

    #[test]
    fn explicit_rows_validated() {
        assert!(NeighborGraph::from_rows(vec![vec![1], vec![0]]).is_ok());
        assert!(NeighborGraph::from_rows(vec![vec![0], vec![0]]).is_err());
        assert!(NeighborGraph::from_rows(vec![vec![1], vec![0, 1]]).is_err());
        assert!(NeighborGraph::from_rows(vec![vec![2], vec![0]]).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let one = PointCloud::from_arrays(&[[0.0, 0.0, 0.0]]).unwrap();
        assert!(build_knn_graph(&one, 1).is_err());
        let two = PointCloud::from_arrays(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        assert!(build_knn_graph(&two, 0).is_err());
    }
}
