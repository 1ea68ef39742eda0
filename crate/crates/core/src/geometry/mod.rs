//! Point cloud and mesh containers, spatial indexing and exact
//! nearest-surface queries.

mod cloud;
mod graph;
pub mod io;
mod kdtree;
mod mesh;

pub use cloud::{normalize, NormTransform, PointCloud};
pub use graph::{build_knn_graph, NeighborGraph};
pub use kdtree::{KdTree, Neighbor};
pub use mesh::{closest_point_on_triangle, nearest_surface_point, SurfaceHit, TriMesh};
