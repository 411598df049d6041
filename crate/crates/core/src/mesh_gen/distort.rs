//! Squeezing Delaunay pairs until a target share of edges is non-Delaunay.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GenError;
use crate::mesh::{aspect_ratio, incircle_pair, SimplicialComplex2, DEGENERATE_DOUBLED_AREA, DELAUNAY_TOLERANCE};
use crate::Point3;

const MAX_PASSES: usize = 64;
pub const DEFAULT_MAX_ASPECT_RATIO: f64 = 300.0;
/// The accepted edge ratio may overshoot the target by at most this much.
const RATIO_SLACK: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionSpec {
    /// Share of all edges that should end up shared by a non-Delaunay pair.
    pub target_edge_ratio: f64,
    pub rng_seed: u64,
    /// Fraction of the apex-to-midpoint distance covered per step.
    pub squeeze_factor: f64,
    pub max_steps_per_edge: usize,
    /// Moves leaving any triangle with a larger circumradius/inradius are undone.
    pub max_aspect_ratio: f64,
}

impl DistortionSpec {
    pub fn new(target_edge_ratio: f64, rng_seed: u64) -> Self {
        Self {
            target_edge_ratio,
            rng_seed,
            squeeze_factor: 0.5,
            max_steps_per_edge: 8,
            max_aspect_ratio: DEFAULT_MAX_ASPECT_RATIO,
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        if !(0.0..0.5).contains(&self.target_edge_ratio) {
            return Err(GenError::InvalidSpec(format!("target edge ratio {} not in [0, 0.5)", self.target_edge_ratio)));
        }
        if !(self.squeeze_factor > 0.0 && self.squeeze_factor < 1.0) {
            return Err(GenError::InvalidSpec(format!("squeeze factor {} not in (0, 1)", self.squeeze_factor)));
        }
        if self.max_aspect_ratio.is_nan() || self.max_aspect_ratio <= 2.0 {
            return Err(GenError::InvalidSpec(format!("aspect ratio cap {} must exceed 2", self.max_aspect_ratio)));
        }
        if self.max_steps_per_edge == 0 {
            return Err(GenError::InvalidSpec("max_steps_per_edge must be positive".into()));
        }
        Ok(())
    }
}

struct Work<'a> {
    m: &'a SimplicialComplex2,
    nodes: Vec<Point3>,
}

impl Work<'_> {
    fn pair_points(&self, e: usize) -> Option<([Point3; 3], [Point3; 3], [usize; 2])> {
        let [i1, i2] = match self.m.edge_triangles(e) {
            [a, b] => [*a, *b],
            _ => return None,
        };
        let t1 = self.m.triangles()[i1.triangle];
        let t2 = self.m.triangles()[i2.triangle];
        let c = t1[(i1.local + 2) % 3];
        let d = t2[(i2.local + 2) % 3];
        let p = |v: usize| self.nodes[v];
        Some((
            [p(t1[i1.local]), p(t1[(i1.local + 1) % 3]), p(c)],
            [p(t2[(i2.local + 1) % 3]), p(t2[i2.local]), p(d)],
            [c, d],
        ))
    }

    fn non_delaunay(&self, e: usize) -> bool {
        self.pair_points(e).is_some_and(|(a, b, _)| incircle_pair(a, b) > DELAUNAY_TOLERANCE)
    }

    fn acceptable(&self, t: usize, max_aspect_ratio: f64) -> bool {
        let p = self.m.triangles()[t].map(|v| self.nodes[v]);
        (p[1] - p[0]).cross(&(p[2] - p[0])).z > DEGENERATE_DOUBLED_AREA && aspect_ratio(p) <= max_aspect_ratio
    }

    /// Edges whose in-circle status can change when `apexes` move: every edge
    /// having a moved node as an endpoint or as an apex.
    fn affected_edges(&self, apexes: &[usize]) -> Vec<usize> {
        let mut edges: Vec<usize> =
            apexes.iter().flat_map(|&v| self.m.node_triangles(v)).flat_map(|&t| self.m.triangle_edges(t)).collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

/// Move apexes of randomly chosen interior edges towards the edge midpoint until
/// the edge ratio of non-Delaunay pairs lies in `[target, target + 0.01]`,
/// preferring moves that do not overshoot the target count.
///
/// Only node coordinates change. Apexes on the boundary stay put, so the domain
/// is unchanged. A move is undone if it would invert a triangle or push its
/// aspect ratio past the cap, fails to make its pair non-Delaunay, does not
/// raise the overall count, or overshoots the allowed band.
pub fn distort_to_non_delaunay(m: &SimplicialComplex2, spec: &DistortionSpec) -> Result<SimplicialComplex2, GenError> {
    spec.validate()?;
    if !m.is_flat() || m.is_periodic() {
        return Err(GenError::NotFlat);
    }
    let ne = m.num_edges();
    let target = (spec.target_edge_ratio * ne as f64).ceil() as usize;
    let slack_ceiling = ((spec.target_edge_ratio + RATIO_SLACK) * ne as f64).floor() as usize;
    let mut work = Work { m, nodes: m.nodes().to_vec() };
    let mut count = (0..ne).filter(|&e| work.non_delaunay(e)).count();
    if target == 0 || count >= target {
        return Ok(m.clone());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut candidates: Vec<usize> = m.interior_edges().collect();
    for pass in 0..MAX_PASSES {
        // land exactly on the target first; overshoot only in the later passes
        let ceiling = if pass < MAX_PASSES / 2 { target } else { slack_ceiling.max(target) };
        candidates.shuffle(&mut rng);
        for &e in &candidates {
            if count >= target {
                break;
            }
            if work.non_delaunay(e) {
                continue;
            }
            let Some((_, _, apexes)) = work.pair_points(e) else {
                continue;
            };
            let movable: Vec<usize> = apexes.iter().copied().filter(|&v| !m.is_boundary_node(v)).collect();
            if movable.is_empty() {
                continue;
            }
            let [a, b] = m.edges()[e];
            let mid = 0.5 * (work.nodes[a] + work.nodes[b]);
            let affected = work.affected_edges(&movable);
            let before = affected.iter().filter(|&&f| work.non_delaunay(f)).count();
            let saved: Vec<Point3> = movable.iter().map(|&v| work.nodes[v]).collect();

            let mut ok = false;
            for _ in 0..spec.max_steps_per_edge {
                for &v in &movable {
                    let p = work.nodes[v];
                    work.nodes[v] = p + spec.squeeze_factor * (mid - p);
                }
                let spoiled = movable
                    .iter()
                    .flat_map(|&v| m.node_triangles(v))
                    .any(|&t| !work.acceptable(t, spec.max_aspect_ratio));
                if spoiled {
                    break;
                }
                if work.non_delaunay(e) {
                    ok = true;
                    break;
                }
            }
            if ok {
                let after = affected.iter().filter(|&&f| work.non_delaunay(f)).count();
                if after > before && count + after - before <= ceiling {
                    count += after - before;
                    continue;
                }
            }
            for (&v, &p) in movable.iter().zip(&saved) {
                work.nodes[v] = p;
            }
        }
        if count >= target {
            break;
        }
    }
    if count < target {
        return Err(GenError::TargetUnreachable { achieved: count as f64 / ne as f64, target: spec.target_edge_ratio });
    }
    Ok(m.with_nodes(work.nodes)?)
}
