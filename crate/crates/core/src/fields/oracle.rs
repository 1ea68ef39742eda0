use std::sync::Arc;

use super::GradientField;
use crate::geometry::TriMesh;
use crate::{Error, Result, Vec3};

/// Exact displacement from `x` to the nearest point of `mesh`.
pub fn oracle_query(mesh: &TriMesh, x: &Vec3) -> Result<Vec3> {
    let hit = mesh.nearest(x)?;
    Ok(hit.point - x)
}

/// Ground-truth field from a reference mesh. Every anchor answers with the
/// same exact displacement, so the ensemble reduces to [`oracle_query`].
#[derive(Debug, Clone)]
pub struct OracleField {
    mesh: Arc<TriMesh>,
    anchors: usize,
}

impl OracleField {
    pub fn new(mesh: Arc<TriMesh>, anchors: usize) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::invalid("oracle mesh has no faces"));
        }
        Ok(OracleField { mesh, anchors })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }
}

impl GradientField for OracleField {
    fn len(&self) -> usize {
        self.anchors
    }

    fn query(&self, anchor: usize, x: &Vec3) -> Result<Vec3> {
        if anchor >= self.anchors {
            return Err(Error::invalid(format!("anchor {anchor} out of range ({})", self.anchors)));
        }
        oracle_query(&self.mesh, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::shapes::icosphere;
    use crate::geometry::closest_point_on_triangle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn on_surface_is_zero() {
        let mesh = TriMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(oracle_query(&mesh, &Vec3::new(0.2, 0.3, 0.0)).unwrap().norm() <= 1e-15);
    }

    #[test]
    fn sphere_radial() {
        let mesh = icosphere(3);
        let g = oracle_query(&mesh, &Vec3::new(2.0, 0.0, 0.0)).unwrap();
        // (1, 0, 0) is an icosphere vertex only up to rotation; allow chordal slack
        assert!((g.norm() - 1.0).abs() < 0.01, "{}", g.norm());
        assert!(g.normalize().dot(&-Vec3::x()) > 0.999);
    }

    #[test]
    fn matches_brute_force_componentwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut v = Vec::new();
        let mut f = Vec::new();
        for i in 0..20 {
            for _ in 0..3 {
                v.push(Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
            f.push([3 * i, 3 * i + 1, 3 * i + 2]);
        }
        let mesh = TriMesh::new(v, f).unwrap();
        for _ in 0..100 {
            let x = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let mut best = (f64::INFINITY, Vec3::zeros());
            for face in 0..mesh.faces().len() {
                let [a, b, c] = mesh.triangle(face);
                let p = closest_point_on_triangle(&x, &a, &b, &c);
                if (p - x).norm_squared() < best.0 {
                    best = ((p - x).norm_squared(), p);
                }
            }
            assert_eq!(oracle_query(&mesh, &x).unwrap(), best.1 - x);
        }
    }

    #[test]
    fn anchor_range_checked() {
        let field = OracleField::new(Arc::new(icosphere(1)), 3).unwrap();
        assert!(field.query(2, &Vec3::zeros()).is_ok());
        assert!(field.query(3, &Vec3::zeros()).is_err());
    }
}
