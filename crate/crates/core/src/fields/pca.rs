use nalgebra::{Matrix3, SymmetricEigen};

use crate::Vec3;

/// Principal axes of a small point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub centroid: Vec3,
    /// Covariance eigenvalues, ascending.
    pub eigenvalues: [f64; 3],
    /// Unit eigenvectors matching `eigenvalues`; `axes[0]` is the normal.
    pub axes: [Vec3; 3],
}

impl LocalFrame {
    pub fn normal(&self) -> Vec3 {
        self.axes[0]
    }

    pub fn fit<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> LocalFrame {
        let pts: Vec<&Vec3> = points.into_iter().collect();
        let n = pts.len() as f64;
        let centroid = pts.iter().fold(Vec3::zeros(), |acc, p| acc + *p) / n;
        let mut cov = Matrix3::zeros();
        for p in &pts {
            let d = *p - centroid;
            cov += d * d.transpose();
        }
        cov /= n;
        let eig = SymmetricEigen::new(cov);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.map(|k| eig.eigenvalues[k].max(0.0));
        let axes = order.map(|k| eig.eigenvectors.column(k).into_owned().normalize());
        LocalFrame {
            centroid,
            eigenvalues,
            axes,
        }
    }
}
