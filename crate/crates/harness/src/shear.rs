//! Inviscid double shear layer on the lifted periodic surface.

use std::path::PathBuf;

use anyhow::{Context, Result};
use dec_core::forms::project_dual_1form;
use dec_core::mesh::write_mesh;
use dec_core::pde::{primal0_stiffness, shear_layer_velocity, total_circulation, vorticity, NsBoundary, NsSolver};
use dec_core::sparse::{solve, LinearSystem};
use dec_core::{DualMetrics, SimplicialComplex2};

use crate::meshes::curved_periodic;
use crate::output::{write_atomic, write_string_atomic};
use crate::report::num;

pub const HORIZON: f64 = 0.28;
pub const SNAPSHOT_TIMES: [f64; 3] = [0.0, 0.14, 0.28];
pub const DEFAULT_RESOLUTION: usize = 128;
/// Superlevel threshold for vortex detection, as a fraction of the layer's
/// maximum |ω|.
pub const VORTEX_THRESHOLD: f64 = 0.7;

#[derive(Clone, Debug)]
pub struct ShearSettings {
    /// Grid cells per side before identification.
    pub resolution: usize,
    pub output_dir: PathBuf,
    pub threshold: f64,
}

impl ShearSettings {
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        Self { resolution: DEFAULT_RESOLUTION, output_dir: output_dir.into(), threshold: VORTEX_THRESHOLD }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub max_vorticity: f64,
    /// Connected regions above the threshold in the lower and upper layer.
    pub vortex_counts: [usize; 2],
    /// The same count with threshold ½.
    pub half_max_counts: [usize; 2],
    /// Area-weighted vorticity of the lower and upper layer.
    pub layer_circulation: [f64; 2],
    pub total_circulation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShearOutcome {
    pub triangles: usize,
    pub nd_triangle_ratio: f64,
    pub steps: usize,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    /// Σ|(−d₀ᵀu)| at t = 0, the scale for circulation drift.
    pub circulation_scale: f64,
}

impl ShearOutcome {
    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        &self.snapshots[self.snapshots.len() - 1]
    }

    pub fn relative_circulation_drift(&self) -> f64 {
        (self.last().total_circulation - self.initial().total_circulation).abs() / self.circulation_scale
    }
}

fn in_upper_layer(m: &SimplicialComplex2, v: usize) -> bool {
    m.nodes()[v].y >= 0.5
}

/// Connected components, over mesh edges, of nodes in one layer whose |ω|
/// exceeds `fraction` of that layer's maximum.
pub fn count_vortices(m: &SimplicialComplex2, omega: &[f64], upper: bool, fraction: f64) -> usize {
    let in_layer = |v: usize| in_upper_layer(m, v) == upper;
    let max = (0..m.num_nodes()).filter(|&v| in_layer(v)).fold(0.0f64, |a, v| a.max(omega[v].abs()));
    if max == 0.0 {
        return 0;
    }
    let on: Vec<bool> = (0..m.num_nodes()).map(|v| in_layer(v) && omega[v].abs() > fraction * max).collect();
    let mut parent: Vec<usize> = (0..m.num_nodes()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &[a, b] in m.edges() {
        if on[a] && on[b] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    let mut roots: Vec<usize> = (0..m.num_nodes()).filter(|&v| on[v]).map(|v| find(&mut parent, v)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Initialize ψ from the projected velocity, step inviscidly to [`HORIZON`] and
/// record vorticity snapshots.
pub fn run_shear_layer(settings: &ShearSettings) -> Result<ShearOutcome> {
    let dir = &settings.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (lifted, m) = curved_periodic(settings.resolution)?;
    write_mesh(&lifted, dir.join("mesh.off"))?;
    let metrics = DualMetrics::new(&m)?;

    let u0 = project_dual_1form(shear_layer_velocity, &m, &metrics);
    let rhs: Vec<f64> = m.d0().transpose().spmv(&u0.values)?.iter().map(|v| -v).collect();
    let psi = solve(&LinearSystem::new(primal0_stiffness(&m, &metrics), rhs).with_pin(0, 0.0))?;

    let h_min = metrics.primal_edge_length.iter().copied().fold(f64::INFINITY, f64::min);
    let max_speed = m.nodes().iter().map(|&p| shear_layer_velocity(p).norm()).fold(0.0f64, f64::max);
    let dt_target = 0.25 * h_min / max_speed.max(1.0);
    let half = (0.5 * HORIZON / dt_target).ceil() as usize;
    let steps = 2 * half;
    let dt = HORIZON / steps as f64;

    let solver = NsSolver::new(&m, &metrics, NsBoundary::Periodic { pin_node: 0 })?;
    let mut state = solver.state_from_psi(psi, 0.0, dt, 0.0)?;
    let circulation_scale: f64 = m.d0().transpose().spmv(&state.u_dual.values)?.iter().map(|v| v.abs()).sum();
    log::info!("shear layer: {} triangles, {steps} steps of {dt:.3e}", m.num_triangles());

    let mut snapshots = Vec::new();
    for k in 0..=steps {
        if k > 0 {
            state = solver.step(&state).with_context(|| format!("step {k}"))?;
            state.time = k as f64 * dt;
        }
        if k == 0 || k == half || k == steps {
            let time = SNAPSHOT_TIMES[snapshots.len()];
            let w = vorticity(&m, &metrics, &state.u_dual)?;
            let mut layer_circulation = [0.0; 2];
            for v in 0..m.num_nodes() {
                layer_circulation[usize::from(in_upper_layer(&m, v))] += metrics.star0[v] * w.values[v];
            }
            let snap = Snapshot {
                time,
                max_vorticity: w.max_abs(),
                vortex_counts: [false, true].map(|u| count_vortices(&m, &w.values, u, settings.threshold)),
                half_max_counts: [false, true].map(|u| count_vortices(&m, &w.values, u, 0.5)),
                layer_circulation,
                total_circulation: total_circulation(&m, &state.u_dual)?,
            };
            log::info!("t = {time:.2}: max |w| {:.3}, vortices {:?}", snap.max_vorticity, snap.vortex_counts);
            write_atomic(&dir.join(format!("vorticity_t{time:.2}.csv")), |out| {
                let mut csv = csv::Writer::from_writer(out);
                csv.write_record(["index", "x", "y", "z", "vorticity"])?;
                for (v, p) in m.nodes().iter().enumerate() {
                    csv.write_record([v.to_string(), num(p.x), num(p.y), num(p.z), num(w.values[v])])?;
                }
                csv.flush()
            })?;
            snapshots.push(snap);
        }
    }

    let outcome = ShearOutcome {
        triangles: m.num_triangles(),
        nd_triangle_ratio: m.quality_metrics().non_delaunay_triangle_ratio,
        steps,
        dt,
        snapshots,
        circulation_scale,
    };
    let mut summary = String::from(
        "time,max_vorticity,vortices_lower,vortices_upper,half_max_lower,half_max_upper,total_circulation\n",
    );
    for s in &outcome.snapshots {
        summary += &format!(
            "{:.2},{},{},{},{},{},{}\n",
            s.time,
            num(s.max_vorticity),
            s.vortex_counts[0],
            s.vortex_counts[1],
            s.half_max_counts[0],
            s.half_max_counts[1],
            num(s.total_circulation)
        );
    }
    write_string_atomic(&dir.join("summary.csv"), &summary)?;
    Ok(outcome)
}
