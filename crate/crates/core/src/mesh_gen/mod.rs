//! Mesh families: Delaunay unit squares, distorted non-Delaunay variants,
//! midpoint-subdivided meshes, structured grids, the sinusoidal lift and
//! periodic identification.

mod delaunay;
mod distort;
mod structured;

pub use delaunay::{delaunay_triangulation, delaunay_unit_square, MAX_RESEEDS};
pub use distort::{distort_to_non_delaunay, DistortionSpec, DEFAULT_MAX_ASPECT_RATIO};
pub use structured::{
    lift_sinusoidal, midpoint_subdivide, periodic_identify, sinusoidal_height, structured_grid, PERIODIC_TOLERANCE,
};

use thiserror::Error;

use crate::mesh::MeshError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("mesh generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
    #[error("distortion reached edge ratio {achieved:.4} but the target is {target:.4}")]
    TargetUnreachable { achieved: f64, target: f64 },
    #[error("invalid parameters: {0}")]
    InvalidSpec(String),
    #[error("operation requires a flat mesh with all z equal")]
    NotFlat,
    #[error("boundary node {node} at ({x}, {y}) has no periodic partner")]
    MismatchedBoundary { node: usize, x: f64, y: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
