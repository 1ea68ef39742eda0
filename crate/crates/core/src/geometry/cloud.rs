use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Centering and scaling applied to bring a cloud into the unit sphere.
///
/// `apply` maps model units to unit-sphere units: `(p - center) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormTransform {
    pub center: Vec3,
    pub scale: f64,
}

impl NormTransform {
    pub const IDENTITY: NormTransform = NormTransform {
        center: Vec3::new(0.0, 0.0, 0.0),
        scale: 1.0,
    };

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p - self.center) / self.scale
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        p * self.scale + self.center
    }
}

/// An ordered, nonempty list of finite 3D points.
///
/// When the cloud was produced by [`normalize`], `transform` records the
/// mapping from the original frame so results can be brought back.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    transform: Option<NormTransform>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point cloud is empty"));
        }
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid(format!("point {i} has a non-finite coordinate")));
        }
        Ok(PointCloud {
            points,
            transform: None,
        })
    }

    pub fn from_arrays(points: &[[f64; 3]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect())
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false for a constructed cloud; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn transform(&self) -> Option<&NormTransform> {
        self.transform.as_ref()
    }

    pub fn with_transform(mut self, transform: Option<NormTransform>) -> Self {
        self.transform = transform;
        self
    }

    pub fn centroid(&self) -> Vec3 {
        let sum = self.points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
        sum / self.points.len() as f64
    }

    /// Radius of the centroid-centered bounding sphere.
    pub fn bounding_radius(&self) -> f64 {
        let c = self.centroid();
        self.points
            .iter()
            .map(|p| (p - c).norm())
            .fold(0.0, f64::max)
    }

    /// Maps the points back to the original frame if a transform is attached.
    pub fn denormalized(&self) -> PointCloud {
        match &self.transform {
            None => self.clone(),
            Some(t) => PointCloud {
                points: self.points.iter().map(|p| t.invert(p)).collect(),
                transform: None,
            },
        }
    }
}

/// Centers the cloud at its centroid and scales it so the farthest point
/// has norm 1.
///
/// A cloud whose points all coincide has no extent; it is centered and the
/// scale is left at 1.
pub fn normalize(cloud: &PointCloud) -> Result<(PointCloud, NormTransform)> {
    if cloud.is_empty() {
        return Err(Error::invalid("cannot normalize an empty cloud"));
    }
    let center = cloud.centroid();
    let radius = cloud
        .points
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max);
    let scale = if radius > 0.0 { radius } else { 1.0 };
    let transform = NormTransform { center, scale };
    let points = cloud.points.iter().map(|p| transform.apply(p)).collect();
    Ok((
        PointCloud {
            points,
            transform: Some(transform),
        },
        transform,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_points_symmetric() {
        let cloud = PointCloud::from_arrays(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        let (out, t) = normalize(&cloud).unwrap();
        assert_eq!(t.center, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(t.scale, 1.0);
        assert_eq!(out.points(), &[Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
    }

    #[test]
    fn single_point_degenerates_to_unit_scale() {
        let cloud = PointCloud::from_arrays(&[[5.0, 5.0, 5.0]]).unwrap();
        let (out, t) = normalize(&cloud).unwrap();
        assert_eq!(t.center, Vec3::new(5.0, 5.0, 5.0));
        assert_eq!(t.scale, 1.0);
        assert_eq!(out.points(), &[Vec3::zeros()]);
    }

    #[test]
    fn random_cloud_has_unit_max_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec3> = (0..100)
            .map(|_| Vec3::new(rng.random_range(-4.0..7.0), rng.random_range(-1.0..2.0), rng.random_range(0.0..9.0)))
            .collect();
        let (out, _) = normalize(&PointCloud::new(pts).unwrap()).unwrap();
        let max = out.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
        assert!((max - 1.0).abs() <= 1e-12, "max norm {max}");
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(PointCloud::new(vec![]), Err(Error::InvalidInput(_))));
        assert!(PointCloud::from_arrays(&[[0.0, f64::NAN, 0.0]]).is_err());
        assert!(PointCloud::from_arrays(&[[f64::INFINITY, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn denormalize_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Vec3> = (0..50)
            .map(|_| Vec3::new(rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3)))
            .collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let (out, _) = normalize(&cloud).unwrap();
        let back = out.denormalized();
        for (a, b) in pts.iter().zip(back.points()) {
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
}
