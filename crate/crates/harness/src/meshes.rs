//! Refinement sequences for each mesh group.

use dec_core::mesh_gen::{
    delaunay_unit_square, distort_to_non_delaunay, lift_sinusoidal, midpoint_subdivide, periodic_identify,
    structured_grid, DistortionSpec, GenError,
};
use dec_core::SimplicialComplex2;

use crate::config::MeshGroup;

/// Triangle count of the coarsest level; each level quadruples it.
pub const COARSEST_TRIANGLES: usize = 128;

/// Grid resolution of the coarsest curved level; each level doubles it.
pub const COARSEST_CURVED_RESOLUTION: usize = 8;

pub fn level_target(level: usize) -> usize {
    COARSEST_TRIANGLES << (2 * level)
}

/// One mesh of a group's sequence. Level 0 is the coarsest.
///
/// Curved meshes are returned before periodic identification so they can be
/// persisted as OFF; see [`curved_periodic`].
pub fn build_level(group: MeshGroup, level: usize, seed: u64) -> Result<SimplicialComplex2, GenError> {
    match group {
        MeshGroup::Subdivided => {
            let mut m = delaunay_unit_square(COARSEST_TRIANGLES, seed)?;
            for _ in 0..level {
                m = midpoint_subdivide(&m)?;
            }
            Ok(m)
        }
        MeshGroup::Curved => lift_sinusoidal(&structured_grid(COARSEST_CURVED_RESOLUTION << level)?),
        _ => {
            let m = delaunay_unit_square(level_target(level), seed)?;
            match group.distortion_ratio() {
                Some(r) => distort_to_non_delaunay(&m, &DistortionSpec::new(r, seed)),
                None => Ok(m),
            }
        }
    }
}

/// Lifted sinusoidal surface on an `n × n` grid with opposite sides identified.
/// Returns the unidentified surface alongside the periodic complex.
pub fn curved_periodic(n: usize) -> Result<(SimplicialComplex2, SimplicialComplex2), GenError> {
    let lifted = lift_sinusoidal(&structured_grid(n)?)?;
    let periodic = periodic_identify(&lifted)?;
    Ok((lifted, periodic))
}
