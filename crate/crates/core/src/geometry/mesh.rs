//! Triangle meshes with exact closest-point queries.
//!
//! Queries go through a bounding-volume hierarchy over the faces. The
//! per-triangle projection handles all seven Voronoi regions (interior,
//! three edges, three vertices), so the result is the true closest surface
//! point rather than the closest vertex.

use super::NormTransform;
use crate::{Error, Result, Vec3};

const LEAF_FACES: usize = 4;

/// Result of a nearest-surface query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    pub point: Vec3,
    pub dist2: f64,
    pub face: usize,
}

impl SurfaceHit {
    pub fn dist(&self) -> f64 {
        self.dist2.sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn dist2(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let d = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d2 += d * d;
        }
        d2
    }
}

#[derive(Debug, Clone)]
struct BvhNode {
    bounds: Aabb,
    // faces order[start..end]; children set for inner nodes
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<usize>,
}

impl Bvh {
    fn build(vertices: &[Vec3], faces: &[[usize; 3]]) -> Self {
        let centroids: Vec<Vec3> = faces
            .iter()
            .map(|f| (vertices[f[0]] + vertices[f[1]] + vertices[f[2]]) / 3.0)
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..faces.len()).collect(),
        };
        if !faces.is_empty() {
            bvh.build_node(vertices, faces, &centroids, 0, faces.len());
        }
        bvh
    }

    fn build_node(
        &mut self,
        vertices: &[Vec3],
        faces: &[[usize; 3]],
        centroids: &[Vec3],
        start: usize,
        end: usize,
    ) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &f in &self.order[start..end] {
            for &v in &faces[f] {
                bounds.grow(&vertices[v]);
            }
            cbounds.grow(&centroids[f]);
        }
        let id = self.nodes.len();
        self.nodes.push(BvhNode {
            bounds,
            start,
            end,
            children: None,
        });
        let extent = cbounds.max - cbounds.min;
        let axis = extent.imax();
        if end - start <= LEAF_FACES || extent[axis] <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
        });
        let left = self.build_node(vertices, faces, centroids, start, mid);
        let right = self.build_node(vertices, faces, centroids, mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }
}

/// Indexed triangle mesh. Immutable after construction; zero-area faces are
/// dropped at construction.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    dropped_faces: usize,
    bvh: Bvh,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid(format!("mesh vertex {i} is not finite")));
        }
        let nv = vertices.len();
        if let Some((fi, _)) = faces.iter().enumerate().find(|(_, f)| f.iter().any(|&v| v >= nv)) {
            return Err(Error::invalid(format!(
                "face {fi} references a vertex index >= {nv}"
            )));
        }
        let before = faces.len();
        let faces: Vec<[usize; 3]> = faces
            .into_iter()
            .filter(|f| {
                let [a, b, c] = f.map(|v| vertices[v]);
                (b - a).cross(&(c - a)).norm_squared() > 0.0
            })
            .collect();
        let dropped_faces = before - faces.len();
        if dropped_faces > 0 {
            log::warn!("dropped {dropped_faces} zero-area face(s)");
        }
        let bvh = Bvh::build(&vertices, &faces);
        Ok(TriMesh {
            vertices,
            faces,
            dropped_faces,
            bvh,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Number of zero-area faces removed at construction.
    pub fn dropped_faces(&self) -> usize {
        self.dropped_faces
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        self.faces[face].map(|v| self.vertices[v])
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// The mesh with every vertex mapped through `transform.apply`.
    pub fn transformed(&self, transform: &NormTransform) -> TriMesh {
        let vertices: Vec<Vec3> = self.vertices.iter().map(|v| transform.apply(v)).collect();
        let bvh = Bvh::build(&vertices, &self.faces);
        TriMesh {
            vertices,
            faces: self.faces.clone(),
            dropped_faces: self.dropped_faces,
            bvh,
        }
    }

    /// Closest point on the surface to `q`. Among equidistant faces the
    /// lowest face index wins.
    pub fn nearest(&self, q: &Vec3) -> Result<SurfaceHit> {
        if self.faces.is_empty() {
            return Err(Error::invalid("mesh has no faces"));
        }
        let mut best = SurfaceHit {
            point: Vec3::zeros(),
            dist2: f64::INFINITY,
            face: usize::MAX,
        };
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.bvh.nodes[id];
            if node.bounds.dist2(q) > best.dist2 {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    let dl = self.bvh.nodes[l].bounds.dist2(q);
                    let dr = self.bvh.nodes[r].bounds.dist2(q);
                    // visit the nearer child first (it is popped last-in)
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for &f in &self.bvh.order[node.start..node.end] {
                        let [a, b, c] = self.triangle(f);
                        let p = closest_point_on_triangle(q, &a, &b, &c);
                        let d2 = (p - q).norm_squared();
                        if d2 < best.dist2 || (d2 == best.dist2 && f < best.face) {
                            best = SurfaceHit { point: p, dist2: d2, face: f };
                        }
                    }
                }
            }
        }
        Ok(best)
    }
}

/// Closest point on the surface of `mesh` to `q` and its distance.
pub fn nearest_surface_point(mesh: &TriMesh, q: &Vec3) -> Result<(Vec3, f64)> {
    let hit = mesh.nearest(q)?;
    Ok((hit.point, hit.dist()))
}

/// Closest point to `p` on triangle `abc` (Ericson, "Real-Time Collision
/// Detection", 5.1.5).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}
