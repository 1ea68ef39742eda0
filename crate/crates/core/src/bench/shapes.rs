//! Built-in reference meshes and area-uniform surface sampling.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{io, PointCloud, TriMesh};
use crate::{Error, Result, Vec3};

/// Subdivision level of the built-in sphere (20 · 4^level faces).
pub const SPHERE_LEVEL: u32 = 4;

/// Shape identifier: a built-in (`sphere`, `cube`, `torus`, `plane`) or a
/// path to an OFF file. Built-ins have bounding radius 1 about the origin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Shape {
    Sphere,
    Cube,
    Torus,
    /// Square in the z = 0 plane with corners on the unit circle.
    Plane,
    Mesh(PathBuf),
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Shape::Sphere),
            "cube" => Ok(Shape::Cube),
            "torus" => Ok(Shape::Torus),
            "plane" => Ok(Shape::Plane),
            p if p.to_ascii_lowercase().ends_with(".off") => Ok(Shape::Mesh(p.into())),
            other => Err(Error::invalid(format!(
                "unknown shape {other:?} (expected sphere, cube, torus, plane or a .off path)"
            ))),
        }
    }
}

impl TryFrom<String> for Shape {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Shape> for String {
    fn from(s: Shape) -> String {
        s.to_string()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Sphere => f.write_str("sphere"),
            Shape::Cube => f.write_str("cube"),
            Shape::Torus => f.write_str("torus"),
            Shape::Plane => f.write_str("plane"),
            Shape::Mesh(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Shape {
    pub fn mesh(&self) -> Result<TriMesh> {
        match self {
            Shape::Sphere => Ok(icosphere(SPHERE_LEVEL)),
            Shape::Cube => Ok(cube()),
            Shape::Torus => Ok(torus(0.7, 0.3, 96, 48)),
            Shape::Plane => Ok(plane()),
            Shape::Mesh(p) => io::read_off(p),
        }
    }
}

/// Unit icosphere: a subdivided icosahedron with vertices on the sphere.
pub fn icosphere(level: u32) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| Vec3::new(v[0], v[1], v[2]).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) / 2.0).normalize());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(vertices, faces).expect("icosphere is well formed")
}

/// Axis-aligned cube with corners on the unit sphere.
pub fn cube() -> TriMesh {
    let h = 1.0 / 3f64.sqrt();
    let vertices = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -h } else { h },
                if i & 2 == 0 { -h } else { h },
                if i & 4 == 0 { -h } else { h },
            )
        })
        .collect();
    let faces = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    TriMesh::new(vertices, faces).expect("cube is well formed")
}

/// Torus around the z axis with major radius `major` and tube radius
/// `minor`, tessellated into `seg_u x seg_v` quads.
pub fn torus(major: f64, minor: f64, seg_u: usize, seg_v: usize) -> TriMesh {
    use std::f64::consts::TAU;
    let mut vertices = Vec::with_capacity(seg_u * seg_v);
    for i in 0..seg_u {
        let u = TAU * i as f64 / seg_u as f64;
        for j in 0..seg_v {
            let v = TAU * j as f64 / seg_v as f64;
            let r = major + minor * v.cos();
            vertices.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % seg_u) * seg_v + (j % seg_v);
    let mut faces = Vec::with_capacity(2 * seg_u * seg_v);
    for i in 0..seg_u {
        for j in 0..seg_v {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, faces).expect("torus is well formed")
}

/// Square `[-s, s]²` in z = 0 with `s = 1/√2`.
pub fn plane() -> TriMesh {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    TriMesh::new(
        vec![
            Vec3::new(-s, -s, 0.0),
            Vec3::new(s, -s, 0.0),
            Vec3::new(s, s, 0.0),
            Vec3::new(-s, s, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("plane is well formed")
}

/// `n` points drawn uniformly by area from the mesh surface: a face is
/// picked with probability proportional to its area, then a uniform
/// barycentric point inside it.
pub fn sample_mesh(mesh: &TriMesh, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    if mesh.is_empty() {
        return Err(Error::invalid("cannot sample an empty mesh"));
    }
    let mut cumulative = Vec::with_capacity(mesh.faces().len());
    let mut total = 0.0;
    for f in 0..mesh.faces().len() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let face = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
            let [a, b, c] = mesh.triangle(face);
            let s = rng.random::<f64>().sqrt();
            let r = rng.random::<f64>();
            a * (1.0 - s) + b * (s * (1.0 - r)) + c * (s * r)
        })
        .collect();
    PointCloud::new(points)
}

/// Samples `n` points on a shape; returns the cloud and the shape's mesh.
pub fn sample_shape(shape: &Shape, n: usize, seed: u64) -> Result<(PointCloud, TriMesh)> {
    let mesh = shape.mesh()?;
    let cloud = sample_mesh(&mesh, n, seed)?;
    Ok((cloud, mesh))
}
