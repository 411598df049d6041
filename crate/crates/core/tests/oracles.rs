//! Brute-force dense assemblies built from cotangent weights and explicit loops,
//! compared against the sparse operators and solvers.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use dec_core::forms::{l2_error, project_0form, project_1form, FormField, Placement};
use dec_core::pde::{
    dual0_operator, one_form_operator, primal0_operator, primal0_stiffness, solve_poisson_1form, solve_poisson_dual0,
    solve_poisson_primal0,
};
use dec_core::{DualMetrics, Point3, SimplicialComplex2};

fn p(x: f64, y: f64) -> Point3 {
    Point3::new(x, y, 0.0)
}

fn unit_square() -> SimplicialComplex2 {
    SimplicialComplex2::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)], vec![[0, 1, 2], [0, 2, 3]])
        .unwrap()
}

fn perturbed_quad() -> SimplicialComplex2 {
    SimplicialComplex2::new(vec![p(0.0, 0.0), p(1.0, 0.1), p(1.1, 1.0), p(-0.1, 0.9)], vec![[0, 1, 2], [0, 2, 3]])
        .unwrap()
}

fn cot_at(m: &SimplicialComplex2, t: usize, k: usize) -> f64 {
    let tri = m.triangles()[t];
    let (o, a, b) = (m.nodes()[tri[k]], m.nodes()[tri[(k + 1) % 3]], m.nodes()[tri[(k + 2) % 3]]);
    let (u, v) = (a - o, b - o);
    u.dot(&v) / u.cross(&v).z
}

/// Cotangent weight `½ Σ cot` of the angles opposite an undirected edge.
fn cot_weight(m: &SimplicialComplex2, a: usize, b: usize) -> f64 {
    let mut w = 0.0;
    for (t, tri) in m.triangles().iter().enumerate() {
        for k in 0..3 {
            let (x, y) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            if (x == a && y == b) || (x == b && y == a) {
                w += 0.5 * cot_at(m, t, k);
            }
        }
    }
    w
}

/// Circumcentric node area `Σ (|e_ij|² cot_k + |e_ik|² cot_j)/8`.
fn voronoi_area(m: &SimplicialComplex2, v: usize) -> f64 {
    let mut area = 0.0;
    for (t, tri) in m.triangles().iter().enumerate() {
        let Some(k) = tri.iter().position(|&x| x == v) else {
            continue;
        };
        let (j, l) = ((k + 1) % 3, (k + 2) % 3);
        let pv = m.nodes()[v];
        let ej = (m.nodes()[tri[j]] - pv).norm_squared();
        let el = (m.nodes()[tri[l]] - pv).norm_squared();
        area += (ej * cot_at(m, t, l) + el * cot_at(m, t, j)) / 8.0;
    }
    area
}

fn tri_area(m: &SimplicialComplex2, t: usize) -> f64 {
    let [a, b, c] = m.triangles()[t].map(|v| m.nodes()[v]);
    0.5 * (b - a).cross(&(c - a)).z
}

/// +1 if the triangle's cyclic order traverses `a → b`, −1 for `b → a`, 0 otherwise.
fn circulation_sign(tri: [usize; 3], a: usize, b: usize) -> f64 {
    for k in 0..3 {
        if tri[k] == a && tri[(k + 1) % 3] == b {
            return 1.0;
        }
        if tri[k] == b && tri[(k + 1) % 3] == a {
            return -1.0;
        }
    }
    0.0
}

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

fn pinned(a: &[Vec<f64>], f: &[f64], pin: usize, value: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = f.len();
    let mut a2 = a.to_vec();
    let mut b = f.to_vec();
    for i in 0..n {
        if i != pin {
            b[i] -= a[i][pin] * value;
        }
        a2[i][pin] = 0.0;
        a2[pin][i] = 0.0;
    }
    a2[pin][pin] = 1.0;
    b[pin] = value;
    (a2, b)
}

fn shifted(f: &[f64], w: &[f64]) -> Vec<f64> {
    let mean = f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
    f.iter().map(|v| v - mean).collect()
}

fn exact0(q: Point3) -> f64 {
    (PI * q.x).cos() * (PI * q.y).cos()
}

#[test]
fn hodge_stars_match_cotangent_formulas() {
    for m in [unit_square(), perturbed_quad()] {
        let d = DualMetrics::new(&m).unwrap();
        for (e, &[a, b]) in m.edges().iter().enumerate() {
            assert!((d.star1[e] - cot_weight(&m, a, b)).abs() < 1e-12);
        }
        for v in 0..m.num_nodes() {
            assert!((d.star0[v] - voronoi_area(&m, v)).abs() < 1e-12);
        }
    }
}

#[test]
fn primal_zero_form_operator_and_solve_match_dense_oracle() {
    let m = unit_square();
    let d = DualMetrics::new(&m).unwrap();
    let n = m.num_nodes();
    let mut dense = vec![vec![0.0; n]; n];
    for &[a, b] in m.edges() {
        let w = cot_weight(&m, a, b);
        dense[a][b] += w;
        dense[b][a] += w;
        dense[a][a] -= w;
        dense[b][b] -= w;
    }
    assert!(max_diff(&primal0_stiffness(&m, &d).to_dense(), &dense) < 1e-12);
    let areas: Vec<f64> = (0..n).map(|v| voronoi_area(&m, v)).collect();
    for (i, row) in dense.iter_mut().enumerate() {
        row.iter_mut().for_each(|x| *x /= areas[i]);
    }
    assert!(max_diff(&primal0_operator(&m, &d).unwrap().to_dense(), &dense) < 1e-12);

    let f = project_0form(|q| -2.0 * PI * PI * exact0(q), &m, &d, Placement::PrimalNode).unwrap();
    let u = solve_poisson_primal0(&m, &d, &f, 1, exact0(m.nodes()[1])).unwrap();
    let (a, b) = pinned(&dense, &shifted(&f.values, &areas), 1, exact0(m.nodes()[1]));
    let x = dense_solve(a, b);
    for (s, o) in u.values.iter().zip(&x) {
        assert!((s - o).abs() < 1e-12, "{s} vs {o}");
    }
}

#[test]
fn dual_zero_form_operator_and_solve_match_dense_oracle() {
    let m = perturbed_quad();
    let d = DualMetrics::new(&m).unwrap();
    let nt = m.num_triangles();
    let mut dense = vec![vec![0.0; nt]; nt];
    for &[a, b] in m.edges() {
        let sharing: Vec<usize> = (0..nt).filter(|&t| circulation_sign(m.triangles()[t], a, b) != 0.0).collect();
        if let [t, s] = sharing[..] {
            let w = cot_weight(&m, a, b);
            dense[t][s] += 1.0 / (w * tri_area(&m, t));
            dense[s][t] += 1.0 / (w * tri_area(&m, s));
            dense[t][t] -= 1.0 / (w * tri_area(&m, t));
            dense[s][s] -= 1.0 / (w * tri_area(&m, s));
        }
    }
    assert!(max_diff(&dual0_operator(&m, &d).unwrap().to_dense(), &dense) < 1e-12);

    let f = project_0form(|q| -2.0 * PI * PI * exact0(q), &m, &d, Placement::DualNode).unwrap();
    let pv = exact0(d.circumcenters[0]);
    let u = solve_poisson_dual0(&m, &d, &f, 0, pv).unwrap();
    let areas: Vec<f64> = (0..nt).map(|t| tri_area(&m, t)).collect();
    let (a, b) = pinned(&dense, &shifted(&f.values, &areas), 0, pv);
    let x = dense_solve(a, b);
    for (s, o) in u.values.iter().zip(&x) {
        assert!((s - o).abs() < 1e-12);
    }
}

fn one_form_dense(m: &SimplicialComplex2) -> Vec<Vec<f64>> {
    let ne = m.num_edges();
    let nv = m.num_nodes();
    let areas: Vec<f64> = (0..nv).map(|v| voronoi_area(m, v)).collect();
    let weights: Vec<f64> = m.edges().iter().map(|&[a, b]| cot_weight(m, a, b)).collect();
    let mut dense = vec![vec![0.0; ne]; ne];
    for col in 0..ne {
        // unit 1-form on edge `col`
        let [c0, c1] = m.edges()[col];
        let mut div = vec![0.0; nv];
        div[c0] += weights[col] / areas[c0];
        div[c1] -= weights[col] / areas[c1];
        let curl: Vec<f64> =
            (0..m.num_triangles()).map(|t| circulation_sign(m.triangles()[t], c0, c1) / tri_area(m, t)).collect();
        for (row, &[a, b]) in m.edges().iter().enumerate() {
            let grad_div = div[b] - div[a];
            let mut curl_curl = 0.0;
            for t in 0..m.num_triangles() {
                curl_curl += circulation_sign(m.triangles()[t], a, b) * curl[t];
            }
            let boundary =
                (0..m.num_triangles()).filter(|&t| circulation_sign(m.triangles()[t], a, b) != 0.0).count() == 1;
            dense[row][col] = if boundary { grad_div } else { grad_div - curl_curl / weights[row] };
        }
    }
    dense
}

#[test]
fn one_form_operator_and_reduced_solve_match_dense_oracle() {
    let m = perturbed_quad();
    let d = DualMetrics::new(&m).unwrap();
    let dense = one_form_dense(&m);
    assert!(max_diff(&one_form_operator(&m, &d).unwrap().to_dense(), &dense) < 1e-12);

    let interior: Vec<usize> = m.interior_edges().collect();
    assert_eq!(interior.len(), 1);
    let f = project_1form(|q| Point3::new(q.y * (1.0 - q.y), q.x * q.x, 0.0), &m);
    let g = vec![0.0; m.boundary_edges().len()];
    let u = solve_poisson_1form(&m, &d, &f, &g, None).unwrap();
    let e = interior[0];
    assert!((u.values[e] - f.values[e] / dense[e][e]).abs() < 1e-12);
    for &b in m.boundary_edges() {
        assert_eq!(u.values[b], 0.0);
    }

    // non-zero Dirichlet data enters through the coupling column
    let g: Vec<f64> = (0..m.boundary_edges().len()).map(|i| 0.1 * (i as f64 + 1.0)).collect();
    let u = solve_poisson_1form(&m, &d, &f, &g, None).unwrap();
    let coupling: f64 = m.boundary_edges().iter().zip(&g).map(|(&b, gv)| dense[e][b] * gv).sum();
    assert!((u.values[e] - (f.values[e] - coupling) / dense[e][e]).abs() < 1e-12);
}

#[test]
fn one_form_error_matches_hand_summation() {
    let m = unit_square();
    let d = DualMetrics::new(&m).unwrap();
    let u = FormField::new(vec![0.3, -0.1, 0.25, 0.05, -0.2], Placement::PrimalEdge, &m).unwrap();
    let exact = FormField::zeros(Placement::PrimalEdge, &m);
    // legs: length 1, dual half-length ½ so A_s = ¼; diagonal: zero dual length
    let mut sum = 0.0;
    for (e, &[a, b]) in m.edges().iter().enumerate() {
        let len = (m.nodes()[b] - m.nodes()[a]).norm();
        let a_s = if (len - 1.0).abs() < 1e-15 { 0.25 } else { 0.0 };
        sum += a_s * (u.values[e] / len).powi(2);
    }
    assert_eq!(l2_error(&u, &exact, &m, &d).unwrap(), sum.sqrt());
}
