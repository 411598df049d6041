//! Acceptance criteria AC1 to AC11. Each test prints one `[PASS]` or `[FAIL]`
//! line with the measured quantities before asserting.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::time::Instant;

use dec_core::forms::{l2_error, project_0form, project_1form, FormField, Placement};
use dec_core::mesh_gen::delaunay_unit_square;
use dec_core::pde::{
    dual0_operator, one_form_operator, primal0_operator, primal0_stiffness, solve_poisson_1form, solve_poisson_dual0,
    solve_poisson_primal0, solve_poisson_primal0_scaled,
};
use dec_core::sparse::{condition_number, CondMode};
use dec_core::{DualMetrics, Point3, SimplicialComplex2};
use dec_harness::meshes::{build_level, curved_periodic};
use dec_harness::shear::{run_shear_layer, ShearSettings};
use dec_harness::studies::{cosine_solution, cosine_source, stiffness_matrices};
use dec_harness::{run_convergence, CondnumMode, ExperimentConfig, MeshGroup, Study};

const LEVELS: usize = 5;
const SEED: u64 = 7;

fn verdict(id: &str, pass: bool, detail: &str) {
    println!("[{}] {id} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id} failed: {detail}");
}

/// Slope of every group's sweep, with the wall time of each group.
fn slopes(study: Study, groups: &[MeshGroup]) -> Vec<(MeshGroup, f64, f64)> {
    groups
        .iter()
        .map(|&group| {
            let dir = tempfile::tempdir().unwrap();
            let config = ExperimentConfig {
                study,
                mesh_group: group,
                levels: LEVELS,
                seed: SEED,
                output_dir: dir.path().to_path_buf(),
                condnum_mode: CondnumMode::Off,
            };
            let start = Instant::now();
            let report = run_convergence(&config).unwrap();
            (group, report.slope().unwrap(), start.elapsed().as_secs_f64())
        })
        .collect()
}

fn slope_verdict(id: &str, study: Study, windows: &[(MeshGroup, f64, f64)]) {
    let groups: Vec<MeshGroup> = windows.iter().map(|w| w.0).collect();
    let mut pass = true;
    let mut detail = format!("{study}:");
    for ((group, slope, secs), (_, lo, hi)) in slopes(study, &groups).into_iter().zip(windows) {
        let ok = (*lo..=*hi).contains(&slope) && secs < 180.0;
        pass &= ok;
        detail += &format!(" {group} slope {slope:.3} in [{lo}, {hi}] {} ({secs:.1}s);", if ok { "yes" } else { "NO" });
    }
    verdict(id, pass, &detail);
}

fn planar(lo: f64, hi: f64) -> Vec<(MeshGroup, f64, f64)> {
    MeshGroup::PLANAR.iter().map(|&g| (g, lo, hi)).collect()
}

#[test]
fn ac1_primal_zero_form_poisson_second_order() {
    slope_verdict("AC1", Study::Poisson0Primal, &planar(1.7, 2.3));
}

#[test]
fn ac2_dual_zero_form_poisson_first_order() {
    slope_verdict("AC2", Study::Poisson0Dual, &planar(0.7, 1.3));
}

#[test]
fn ac3_one_form_poisson_first_order() {
    slope_verdict("AC3", Study::Poisson1, &planar(0.7, 1.3));
}

#[test]
fn ac4_poiseuille_first_order_and_subdivided_second_order() {
    let mut windows = planar(0.7, 1.3);
    windows.push((MeshGroup::Subdivided, 1.7, 2.3));
    slope_verdict("AC4", Study::NsPoiseuille, &windows);
}

fn tiling_gaps(m: &SimplicialComplex2) -> (f64, f64) {
    let d = DualMetrics::new(m).unwrap();
    let total: f64 = d.triangle_area.iter().sum();
    let cells: f64 = d.dual_cell_area.iter().sum();
    let support: f64 = d.support_area.iter().sum();
    ((cells - total).abs() / total, (support - total).abs() / total)
}

#[test]
fn ac5_signed_tiling_on_every_mesh() {
    let mut worst = (0.0f64, 0.0f64);
    let mut count = 0;
    let mut check = |m: &SimplicialComplex2| {
        let (c, s) = tiling_gaps(m);
        worst = (worst.0.max(c), worst.1.max(s));
        count += 1;
    };
    for group in
        [MeshGroup::Delaunay, MeshGroup::Nd1, MeshGroup::Nd5, MeshGroup::Nd15, MeshGroup::Subdivided, MeshGroup::Curved]
    {
        for level in 0..LEVELS {
            check(&build_level(group, level, SEED).unwrap());
        }
    }
    for n in [8, 16, 32, 64, 128] {
        check(&curved_periodic(n).unwrap().1);
    }
    let pass = worst.0 < 1e-12 && worst.1 < 1e-12;
    verdict("AC5", pass, &format!("{count} meshes: worst dual-cell gap {:.2e}, support gap {:.2e}", worst.0, worst.1));
}

#[test]
fn ac6_structural_identities_and_scaled_system() {
    let mut pass = true;
    let mut detail = String::new();
    let finest = LEVELS - 1;
    for group in MeshGroup::PLANAR {
        let m = build_level(group, finest, SEED).unwrap();
        let d = DualMetrics::new(&m).unwrap();
        let dd = m.d1().spmm(&m.d0()).unwrap().max_abs();
        let asym = primal0_stiffness(&m, &d).asymmetry();

        let f = project_0form(cosine_source, &m, &d, Placement::PrimalNode).unwrap();
        let pin = (0..m.num_nodes()).find(|&v| !m.is_boundary_node(v)).unwrap();
        let value = cosine_solution(m.nodes()[pin]);
        let u3 = solve_poisson_primal0(&m, &d, &f, pin, value).unwrap();
        let us = solve_poisson_primal0_scaled(&m, &d, &f, pin, value).unwrap();
        let agree = u3.values.iter().zip(&us.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));

        let mats = stiffness_matrices(Study::Poisson0Primal, &m, &d).unwrap();
        let c3 = condition_number(&mats[0].1, CondMode::Estimate).unwrap();
        let cs = condition_number(&mats[1].1, CondMode::Estimate).unwrap();
        let ratio = c3 / cs;

        let structural = dd == 0.0 && asym == 0.0 && agree < 1e-9;
        let reduction = group == MeshGroup::Delaunay || ratio >= 100.0;
        pass &= structural && reduction;
        detail += &format!(
            " {group}: d1d0 {dd:e}, asymmetry {asym:e}, solutions differ {agree:.1e}, cond {c3:.2e} -> {cs:.2e} (x{ratio:.1}){};",
            if group == MeshGroup::Delaunay { "" } else if reduction { " >=100x yes" } else { " >=100x NO" }
        );
    }
    verdict("AC6", pass, &detail);
}

#[test]
fn ac7_non_delaunay_condition_number_gap() {
    let finest = LEVELS - 1;
    let cond = |group| {
        let m = build_level(group, finest, SEED).unwrap();
        let d = DualMetrics::new(&m).unwrap();
        let a = stiffness_matrices(Study::Poisson0Primal, &m, &d).unwrap().swap_remove(0).1;
        condition_number(&a, CondMode::Estimate).unwrap()
    };
    let (del, nd15) = (cond(MeshGroup::Delaunay), cond(MeshGroup::Nd15));
    let ratio = nd15 / del;
    verdict(
        "AC7",
        ratio >= 100.0,
        &format!("level {finest}: delaunay {del:.3e}, nd15 {nd15:.3e}, ratio {ratio:.0} (need >= 100)"),
    );
}

#[test]
fn ac8_distortion_ratios() {
    let bands =
        [(MeshGroup::Nd1, 0.01, 0.02, 0.05), (MeshGroup::Nd5, 0.05, 0.10, 0.20), (MeshGroup::Nd15, 0.15, 0.35, 0.50)];
    let mut pass = true;
    let mut detail = String::new();
    for (group, edge_target, lo, hi) in bands {
        for level in 0..LEVELS {
            let q = build_level(group, level, SEED).unwrap().quality_metrics();
            let ok = (q.non_delaunay_edge_ratio - edge_target).abs() <= 0.01
                && (lo..=hi).contains(&q.non_delaunay_triangle_ratio);
            pass &= ok;
            detail += &format!(
                " {group}/L{level}: edges {:.2}% triangles {:.2}% aspect {:.0}{};",
                100.0 * q.non_delaunay_edge_ratio,
                100.0 * q.non_delaunay_triangle_ratio,
                q.max_aspect_ratio,
                if ok { "" } else { " OUT" }
            );
        }
    }
    verdict("AC8", pass, &detail);
}

#[test]
fn ac9_double_shear_layer() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let result = run_shear_layer(&ShearSettings::new(dir.path()));
    let secs = start.elapsed().as_secs_f64();
    let out = match result {
        Ok(out) => out,
        Err(e) => {
            verdict("AC9", false, &format!("solver failure: {e:#}"));
            unreachable!()
        }
    };
    let (init, last) = (out.initial(), out.last());
    let bounded = last.max_vorticity <= 2.0 * init.max_vorticity;
    let four = last.vortex_counts == [4, 4];
    let drift = out.relative_circulation_drift();
    let curved_nd = (0.45..=0.55).contains(&out.nd_triangle_ratio);
    let pass = bounded && four && drift < 1e-8 && curved_nd;
    verdict(
        "AC9",
        pass,
        &format!(
            "{} triangles, {:.1}% non-Delaunay, {} steps in {secs:.0}s; max|w| {:.2} -> {:.2}; vortices per layer {:?} \
             (half-max superlevel sets {:?}); circulation drift {drift:.1e} relative",
            out.triangles,
            100.0 * out.nd_triangle_ratio,
            out.steps,
            init.max_vorticity,
            last.max_vorticity,
            last.vortex_counts,
            last.half_max_counts
        ),
    );
}

// Dense brute-force oracle for AC10, built from explicit circumcenters.

fn p(x: f64, y: f64) -> Point3 {
    Point3::new(x, y, 0.0)
}

fn unit_square() -> SimplicialComplex2 {
    SimplicialComplex2::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)], vec![[0, 1, 2], [0, 2, 3]])
        .unwrap()
}

/// The unit square's diagonal has a zero-length dual edge, so operators that
/// divide by ∗₁ are checked on a slightly skewed two-triangle quad.
fn skewed_square() -> SimplicialComplex2 {
    SimplicialComplex2::new(vec![p(0.0, 0.0), p(1.0, 0.1), p(1.1, 1.0), p(-0.1, 0.9)], vec![[0, 1, 2], [0, 2, 3]])
        .unwrap()
}

struct Dense {
    d0: Vec<Vec<f64>>,
    d1: Vec<Vec<f64>>,
    star0: Vec<f64>,
    star1: Vec<f64>,
    area: Vec<f64>,
    boundary_edge: Vec<bool>,
}

fn circumcenter(a: Point3, b: Point3, c: Point3) -> Point3 {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let s = |q: Point3| q.x * q.x + q.y * q.y;
    p(
        (s(a) * (b.y - c.y) + s(b) * (c.y - a.y) + s(c) * (a.y - b.y)) / d,
        (s(a) * (c.x - b.x) + s(b) * (a.x - c.x) + s(c) * (b.x - a.x)) / d,
    )
}

fn signed_area(a: Point3, b: Point3, c: Point3) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

fn dense_from(m: &SimplicialComplex2) -> Dense {
    let (nv, ne, nt) = (m.num_nodes(), m.num_edges(), m.num_triangles());
    let x = m.nodes();
    let mut d0 = vec![vec![0.0; nv]; ne];
    for (e, &[a, b]) in m.edges().iter().enumerate() {
        d0[e][a] = -1.0;
        d0[e][b] = 1.0;
    }
    let mut d1 = vec![vec![0.0; ne]; nt];
    let (mut star0, mut dual_len, mut area) = (vec![0.0; nv], vec![0.0; ne], vec![0.0; nt]);
    let mut incidences = vec![0; ne];
    for (t, &tri) in m.triangles().iter().enumerate() {
        let c = circumcenter(x[tri[0]], x[tri[1]], x[tri[2]]);
        area[t] = signed_area(x[tri[0]], x[tri[1]], x[tri[2]]);
        for k in 0..3 {
            let (i, j, o) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let e = m.edges().iter().position(|&[a, b]| (a, b) == (i, j) || (a, b) == (j, i)).unwrap();
            d1[t][e] = if m.edges()[e] == [i, j] { 1.0 } else { -1.0 };
            incidences[e] += 1;
            let mid = 0.5 * (x[i] + x[j]);
            // distance midpoint to circumcenter, negative when the circumcenter
            // is on the far side of the edge from the opposite vertex
            let side = signed_area(x[i], x[j], c).signum() * signed_area(x[i], x[j], x[o]).signum();
            dual_len[e] += side * (c - mid).norm();
            star0[i] += signed_area(x[i], mid, c);
            star0[j] += signed_area(x[j], c, mid);
        }
    }
    let star1 = (0..ne).map(|e| dual_len[e] / (x[m.edges()[e][1]] - x[m.edges()[e][0]]).norm()).collect();
    Dense { d0, d1, star0, star1, area, boundary_edge: incidences.iter().map(|&n| n == 1).collect() }
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter().map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect()).collect()
}

fn diag(d: &[f64]) -> Vec<Vec<f64>> {
    (0..d.len()).map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect()).collect()
}

fn scaled(a: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    a.iter().map(|r| r.iter().map(|x| s * x).collect()).collect()
}

fn sub(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in 0..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Replace row and column `pin` by the identity and move the known value to the right side.
fn pin_system(a: &[Vec<f64>], f: &[f64], pin: usize, value: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a2 = a.to_vec();
    let b: Vec<f64> = (0..f.len()).map(|i| if i == pin { value } else { f[i] - a[i][pin] * value }).collect();
    for i in 0..f.len() {
        a2[i][pin] = 0.0;
        a2[pin][i] = 0.0;
    }
    a2[pin][pin] = 1.0;
    (a2, b)
}

fn mean_free(f: &[f64], w: &[f64]) -> Vec<f64> {
    let mean = f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
    f.iter().map(|v| v - mean).collect()
}

fn vec_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn ac10_operators_match_dense_oracle() {
    let mut worst = 0.0f64;
    let mut note = |name: &str, v: f64, detail: &mut String| {
        worst = worst.max(v);
        *detail += &format!(" {name} {v:.1e};");
    };
    let mut detail = String::new();

    let m = unit_square();
    let d = DualMetrics::new(&m).unwrap();
    let o = dense_from(&m);
    note("star0", vec_diff(&d.star0, &o.star0), &mut detail);
    note("star1", vec_diff(&d.star1, &o.star1), &mut detail);
    note("d0", max_diff(&m.d0().to_dense(), &o.d0), &mut detail);
    note("d1", max_diff(&m.d1().to_dense(), &o.d1), &mut detail);
    let inv0: Vec<f64> = o.star0.iter().map(|s| 1.0 / s).collect();
    let stiffness = scaled(&matmul(&transpose(&o.d0), &matmul(&diag(&o.star1), &o.d0)), -1.0);
    let primal = matmul(&diag(&inv0), &stiffness);
    note("primal stiffness", max_diff(&primal0_stiffness(&m, &d).to_dense(), &stiffness), &mut detail);
    note("primal operator", max_diff(&primal0_operator(&m, &d).unwrap().to_dense(), &primal), &mut detail);
    let f = project_0form(cosine_source, &m, &d, Placement::PrimalNode).unwrap();
    let u = solve_poisson_primal0(&m, &d, &f, 2, cosine_solution(m.nodes()[2])).unwrap();
    let (a, b) = pin_system(&primal, &mean_free(&f.values, &o.star0), 2, cosine_solution(m.nodes()[2]));
    note("primal solve", vec_diff(&u.values, &gauss(a, b)), &mut detail);

    let m = skewed_square();
    let d = DualMetrics::new(&m).unwrap();
    let o = dense_from(&m);
    note("skewed star0", vec_diff(&d.star0, &o.star0), &mut detail);
    note("skewed star1", vec_diff(&d.star1, &o.star1), &mut detail);
    let inv0: Vec<f64> = o.star0.iter().map(|s| 1.0 / s).collect();
    let inv1_interior: Vec<f64> =
        o.star1.iter().zip(&o.boundary_edge).map(|(s, &b)| if b { 0.0 } else { 1.0 / s }).collect();
    let inv_area: Vec<f64> = o.area.iter().map(|a| 1.0 / a).collect();
    let neg_inv1: Vec<f64> = inv1_interior.iter().map(|v| -v).collect();
    let dual = matmul(&diag(&inv_area), &matmul(&o.d1, &matmul(&diag(&neg_inv1), &transpose(&o.d1))));
    note("dual operator", max_diff(&dual0_operator(&m, &d).unwrap().to_dense(), &dual), &mut detail);
    let f = project_0form(cosine_source, &m, &d, Placement::DualNode).unwrap();
    let pv = cosine_solution(circumcenter(m.nodes()[0], m.nodes()[1], m.nodes()[2]));
    let u = solve_poisson_dual0(&m, &d, &f, 0, pv).unwrap();
    let (a, b) = pin_system(&dual, &mean_free(&f.values, &o.area), 0, pv);
    note("dual solve", vec_diff(&u.values, &gauss(a, b)), &mut detail);

    let grad_div = scaled(&matmul(&o.d0, &matmul(&diag(&inv0), &matmul(&transpose(&o.d0), &diag(&o.star1)))), -1.0);
    let curl_curl = matmul(&diag(&inv1_interior), &matmul(&transpose(&o.d1), &matmul(&diag(&inv_area), &o.d1)));
    let one = sub(&grad_div, &curl_curl);
    note("one-form operator", max_diff(&one_form_operator(&m, &d).unwrap().to_dense(), &one), &mut detail);
    let f = project_1form(|q| Point3::new((PI * q.y).sin(), q.x * q.y, 0.0), &m);
    let g: Vec<f64> = (0..m.boundary_edges().len()).map(|i| 0.05 * i as f64).collect();
    let u = solve_poisson_1form(&m, &d, &f, &g, None).unwrap();
    let interior: Vec<usize> = (0..m.num_edges()).filter(|&e| !o.boundary_edge[e]).collect();
    let mut known = vec![0.0; m.num_edges()];
    for (&e, &v) in m.boundary_edges().iter().zip(&g) {
        known[e] = v;
    }
    let reduced: Vec<Vec<f64>> = interior.iter().map(|&r| interior.iter().map(|&c| one[r][c]).collect()).collect();
    let rhs: Vec<f64> =
        interior.iter().map(|&r| f.values[r] - (0..m.num_edges()).map(|c| one[r][c] * known[c]).sum::<f64>()).collect();
    let mut expected = known.clone();
    for (&e, v) in interior.iter().zip(gauss(reduced, rhs)) {
        expected[e] = v;
    }
    note("one-form solve", vec_diff(&u.values, &expected), &mut detail);

    // l2_error on the unit square against a hand summation: legs have A_s = ½ · 1 · ½,
    // the diagonal has zero dual length
    let m = unit_square();
    let d = DualMetrics::new(&m).unwrap();
    let num = FormField::new(vec![0.5, -0.25, 0.75, 0.125, -1.0], Placement::PrimalEdge, &m).unwrap();
    let zero = FormField::zeros(Placement::PrimalEdge, &m);
    let legs: Vec<usize> = (0..5).filter(|&e| (m.edge_length(e) - 1.0).abs() < 1e-15).collect();
    let hand = legs.iter().map(|&e| 0.25 * num.values[e] * num.values[e]).sum::<f64>().sqrt();
    let l2 = l2_error(&num, &zero, &m, &d).unwrap();
    let l2_exact = l2 == hand;
    detail += &format!(" l2 {l2:.17} vs hand {hand:.17};");

    verdict("AC10", worst < 1e-12 && l2_exact && legs.len() == 4, &format!("max deviation {worst:.1e}:{detail}"));
}

/// True if no node lies strictly inside any triangle's circumcircle.
fn empty_circumcircles(m: &SimplicialComplex2) -> bool {
    m.triangles().iter().all(|&[a, b, c]| {
        let x = m.nodes();
        let cc = circumcenter(x[a], x[b], x[c]);
        let r2 = (x[a] - cc).norm_squared();
        x.iter().enumerate().all(|(v, q)| v == a || v == b || v == c || (q - cc).norm_squared() >= r2 * (1.0 - 1e-9))
    })
}

#[test]
fn ac11_generator_passes_brute_force_delaunay_check() {
    let mut checked = Vec::new();
    let mut pass = true;
    for seed in 0..6u64 {
        for target in [8, 50, 128, 240, 400] {
            let m = delaunay_unit_square(target, seed).unwrap();
            if m.num_triangles() > 500 {
                continue;
            }
            pass &= empty_circumcircles(&m);
            checked.push(m.num_triangles());
        }
    }
    verdict(
        "AC11",
        pass && checked.len() == 30,
        &format!(
            "{} meshes with {}..{} triangles",
            checked.len(),
            checked.iter().min().unwrap(),
            checked.iter().max().unwrap()
        ),
    );
}
