//! Slow reference implementations the acceptance checks compare against.
//!
//! Nothing here shares code paths with the fast versions in `pcdenoise`
//! beyond the field and graph types.

use pcdenoise::fields::{ensemble_gradient, GradientField};
use pcdenoise::geometry::{NeighborGraph, TriMesh};
use pcdenoise::Vec3;

/// Mean over `a` of the squared distance to the nearest point of `b`.
pub fn one_sided_chamfer(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .map(|p| b.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / a.len() as f64
}

pub fn brute_chamfer(a: &[Vec3], b: &[Vec3]) -> f64 {
    one_sided_chamfer(a, b) + one_sided_chamfer(b, a)
}

fn segment_distance2(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + ab * t - p).norm_squared()
}

/// Squared distance from `p` to triangle `abc`: the plane distance when the
/// projection lands inside, otherwise the nearest edge.
pub fn triangle_distance2(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let n = (b - a).cross(&(c - a));
    let area2 = n.norm_squared();
    let edges = || {
        segment_distance2(p, a, b)
            .min(segment_distance2(p, b, c))
            .min(segment_distance2(p, c, a))
    };
    if area2 == 0.0 {
        return edges();
    }
    let h = (p - a).dot(&n) / area2;
    let foot = p - n * h;
    let inside = [(a, b), (b, c), (c, a)]
        .iter()
        .all(|(u, v)| (*v - *u).cross(&(foot - *u)).dot(&n) >= 0.0);
    if inside {
        (p - foot).norm_squared()
    } else {
        edges()
    }
}

/// Mean over `points` of the squared distance to the nearest face.
pub fn brute_point_to_mesh(points: &[Vec3], mesh: &TriMesh) -> f64 {
    points
        .iter()
        .map(|p| {
            (0..mesh.faces().len())
                .map(|f| {
                    let [a, b, c] = mesh.triangle(f);
                    triangle_distance2(p, &a, &b, &c)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum::<f64>()
        / points.len() as f64
}

/// Plain gradient ascent `x ← x + β γ^t z(x)` for `t = 1..=steps`, one
/// point at a time against a frozen copy of the previous positions.
pub fn classical_ascent<F>(
    start: &[Vec3],
    field: &F,
    graph: &NeighborGraph,
    steps: usize,
    beta: f64,
    gamma: f64,
) -> Vec<Vec3>
where
    F: GradientField + ?Sized,
{
    let mut x = start.to_vec();
    for t in 1..=steps {
        let prev = x.clone();
        let scale = beta * gamma.powi(t as i32);
        for (i, p) in prev.iter().enumerate() {
            let z = ensemble_gradient(field, graph, i, p).expect("gradient query");
            x[i] = p + z * scale;
        }
    }
    x
}

/// Mean of `|‖p − center‖ − radius|`.
pub fn mean_radius_error(points: &[Vec3], center: &Vec3, radius: f64) -> f64 {
    points.iter().map(|p| ((p - center).norm() - radius).abs()).sum::<f64>() / points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_distance_cases() {
        let (a, b, c) = (Vec3::zeros(), Vec3::x(), Vec3::y());
        assert_eq!(triangle_distance2(&Vec3::new(0.2, 0.2, 3.0), &a, &b, &c), 9.0);
        assert_eq!(triangle_distance2(&Vec3::new(2.0, 0.0, 0.0), &a, &b, &c), 1.0);
        assert_eq!(triangle_distance2(&Vec3::new(-1.0, -1.0, 1.0), &a, &b, &c), 3.0);
        assert!((triangle_distance2(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c) - 0.5).abs() < 1e-15);
        // degenerate triangle falls back to its edges
        assert_eq!(triangle_distance2(&Vec3::new(0.5, 1.0, 0.0), &a, &b, &(b * 2.0)), 1.0);
    }

    #[test]
    fn chamfer_of_identical_sets_is_zero() {
        let pts = vec![Vec3::x(), Vec3::y(), Vec3::new(0.3, 0.1, -2.0)];
        assert_eq!(brute_chamfer(&pts, &pts), 0.0);
        assert_eq!(brute_chamfer(&pts[..1], &pts[1..2]), 4.0);
    }
}
