//! Discrete exterior calculus (DEC) on triangle meshes embedded in 3-space.
//!
//! Dual quantities use the signed circumcentric convention: a circumcenter lying on
//! the far side of an edge contributes a negative dual length and a negative dual
//! area sector, so the diagonal Hodge stars stay well defined on non-Delaunay
//! triangulations and the dual cells still tile the domain in a signed sense.
//!
//! Module map:
//! - [`mesh`]: oriented simplicial 2-complexes, incidence matrices, quality metrics, OFF I/O
//! - [`mesh_gen`]: Delaunay, distorted, subdivided, lifted and periodic mesh families
//! - [`dual`]: circumcenters, signed dual volumes, Hodge stars, boundary closure
//! - [`sparse`]: compressed-row matrices, direct solves, condition numbers
//! - [`forms`]: discrete forms, projections of analytic fields, L² errors
//! - [`pde`]: Poisson solvers and the stream-function Navier–Stokes stepper

pub mod dual;
pub mod forms;
pub mod mesh;
pub mod mesh_gen;
pub mod pde;
pub mod sparse;

/// Points and vectors in the embedding space.
pub type Point3 = nalgebra::Vector3<f64>;

pub use dual::{DualError, DualMetrics, HodgeStars};
pub use forms::{FormError, FormField, Placement};
pub use mesh::{MeshError, MeshQuality, SimplicialComplex2};
pub use sparse::{LinalgError, LinearSystem, SparseMatrix};
