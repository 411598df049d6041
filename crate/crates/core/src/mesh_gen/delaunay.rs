//! Bowyer–Watson insertion with a super-triangle.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GenError;
use crate::mesh::SimplicialComplex2;
use crate::Point3;

/// Jittered point sets are redrawn at most this many times.
pub const MAX_RESEEDS: usize = 5;

const JITTER: f64 = 0.3;
const NONE: usize = usize::MAX;

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Positive when `d` lies strictly inside the circumcircle of counterclockwise `a, b, c`.
fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let al = adx * adx + ady * ady;
    let bl = bdx * bdx + bdy * bdy;
    let cl = cdx * cdx + cdy * cdy;
    adx * (bdy * cl - bl * cdy) - ady * (bdx * cl - bl * cdx) + al * (bdx * cdy - bdy * cdx)
}

struct Tri {
    v: [usize; 3],
    /// `n[k]` lies across side `(v[k], v[k+1])`.
    n: [usize; 3],
    alive: bool,
}

/// Delaunay triangulation of distinct planar points whose convex hull is
/// contained in the unit square's neighbourhood. Returns counterclockwise
/// triangles indexing into `points`.
pub fn delaunay_triangulation(points: &[[f64; 2]]) -> Result<Vec<[usize; 3]>, GenError> {
    let np = points.len();
    let mut pts = points.to_vec();
    pts.extend([[-19.5, -10.0], [20.5, -10.0], [0.5, 30.0]]);
    let mut tris = vec![Tri { v: [np, np + 1, np + 2], n: [NONE; 3], alive: true }];

    let mut in_cavity: Vec<bool> = vec![false];
    let mut start_at = vec![NONE; np + 3];
    let mut end_at = vec![NONE; np + 3];
    let mut last = 0;

    for (i, &p) in points.iter().enumerate() {
        // walk towards the point
        let mut t = last;
        let mut guard = 0;
        'walk: loop {
            guard += 1;
            if guard > 4 * tris.len() + 16 {
                return Err(GenError::GenerationFailed {
                    attempts: 1,
                    reason: "point location did not terminate".into(),
                });
            }
            let tri = &tris[t];
            for k in 0..3 {
                if orient(pts[tri.v[k]], pts[tri.v[(k + 1) % 3]], p) < 0.0 && tri.n[k] != NONE {
                    t = tri.n[k];
                    continue 'walk;
                }
            }
            break;
        }

        // cavity of triangles whose circumcircle strictly contains p
        let mut cavity = vec![t];
        in_cavity[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(c) = queue.pop_front() {
            for k in 0..3 {
                let nb = tris[c].n[k];
                if nb == NONE || in_cavity[nb] {
                    continue;
                }
                let v = tris[nb].v;
                if incircle(pts[v[0]], pts[v[1]], pts[v[2]], p) > 0.0 {
                    in_cavity[nb] = true;
                    cavity.push(nb);
                    queue.push_back(nb);
                }
            }
        }

        // fan the cavity boundary to p
        let mut created = Vec::new();
        for &c in &cavity {
            for k in 0..3 {
                let nb = tris[c].n[k];
                if nb != NONE && in_cavity[nb] {
                    continue;
                }
                let (u, w) = (tris[c].v[k], tris[c].v[(k + 1) % 3]);
                if orient(pts[u], pts[w], p) <= 0.0 {
                    return Err(GenError::GenerationFailed {
                        attempts: 1,
                        reason: format!("cavity not star-shaped at point {i}"),
                    });
                }
                let id = tris.len();
                tris.push(Tri { v: [u, w, i], n: [nb, NONE, NONE], alive: true });
                in_cavity.push(false);
                if nb != NONE {
                    let back = tris[nb].n.iter().position(|&x| x == c).expect("mutual adjacency");
                    tris[nb].n[back] = id;
                }
                start_at[u] = id;
                end_at[w] = id;
                created.push(id);
            }
        }
        for &id in &created {
            let [u, w, _] = tris[id].v;
            tris[id].n[1] = start_at[w];
            tris[id].n[2] = end_at[u];
        }
        for &id in &created {
            let [u, w, _] = tris[id].v;
            start_at[u] = NONE;
            end_at[w] = NONE;
        }
        for &c in &cavity {
            tris[c].alive = false;
            in_cavity[c] = false;
        }
        last = *created.last().expect("non-empty cavity");
    }

    Ok(tris.iter().filter(|t| t.alive && t.v.iter().all(|&v| v < np)).map(|t| t.v).collect())
}

fn jittered_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let h = 1.0 / n as f64;
    let mut pts = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        for j in 0..=n {
            let (x, y) = (i as f64 * h, j as f64 * h);
            if i == 0 || j == 0 || i == n || j == n {
                pts.push([x, y]);
            } else {
                let dx = rng.gen_range(-JITTER..=JITTER) * h;
                let dy = rng.gen_range(-JITTER..=JITTER) * h;
                pts.push([x + dx, y + dy]);
            }
        }
    }
    pts
}

/// Delaunay mesh of the unit square from a boundary-conforming jittered grid.
///
/// The grid has `n = round(sqrt(target / 2))` cells per side, giving exactly
/// `2n²` triangles. Interior points are displaced by up to `0.3h` in each
/// coordinate. The same seed always yields the same mesh.
pub fn delaunay_unit_square(target_triangle_count: usize, rng_seed: u64) -> Result<SimplicialComplex2, GenError> {
    if target_triangle_count < 2 {
        return Err(GenError::InvalidSpec(format!("target triangle count {target_triangle_count} < 2")));
    }
    let n = ((target_triangle_count as f64 / 2.0).sqrt().round() as usize).max(1);
    let mut reason = String::new();
    for attempt in 0..MAX_RESEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed.wrapping_add(attempt as u64));
        let pts = jittered_points(n, &mut rng);
        let tris = match delaunay_triangulation(&pts) {
            Ok(t) => t,
            Err(e) => {
                reason = e.to_string();
                continue;
            }
        };
        if tris.len() != 2 * n * n {
            reason = format!("{} triangles instead of {}", tris.len(), 2 * n * n);
            continue;
        }
        let nodes = pts.iter().map(|p| Point3::new(p[0], p[1], 0.0)).collect();
        let m = match SimplicialComplex2::new(nodes, tris) {
            Ok(m) => m,
            Err(e) => {
                reason = e.to_string();
                continue;
            }
        };
        let q = m.quality_metrics();
        if q.non_delaunay_edges == 0 && m.boundary_edges().len() == 4 * n {
            return Ok(m);
        }
        reason = format!("{} non-Delaunay edges", q.non_delaunay_edges);
        log::warn!("delaunay attempt {attempt} rejected: {reason}");
    }
    Err(GenError::GenerationFailed { attempts: MAX_RESEEDS, reason })
}
