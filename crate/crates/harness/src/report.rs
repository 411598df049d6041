//! Convergence report rows, slope fit and CSV output.
//!
//! `report.csv` columns, one row per level from coarse to fine:
//!
//! | column | meaning |
//! |---|---|
//! | `level` | 0 is the coarsest |
//! | `triangles`, `nodes`, `edges` | entity counts |
//! | `max_edge`, `min_edge` | primal edge lengths |
//! | `min_dual_edge` | smallest signed dual edge length |
//! | `min_triangle_area`, `min_dual_cell_area` | smallest areas, the latter signed |
//! | `nd_edge_ratio`, `nd_triangle_ratio` | non-Delaunay fractions |
//! | `max_aspect_ratio` | circumradius over inradius |
//! | `error` | fitted error measure |
//! | `alt_error` | secondary error measure (blank if undefined) |
//! | `time_steps` | NS steps to steady state |
//! | `condition_number`, `scaled_condition_number` | optional, see `condnum` |
//! | `status` | `ok`, or `failed: <reason>` on the marker row |

use std::io::{self, Write};
use std::path::Path;

use dec_core::{DualMetrics, SimplicialComplex2};

use crate::output::write_atomic;

pub const REPORT_HEADER: [&str; 18] = [
    "level",
    "triangles",
    "nodes",
    "edges",
    "max_edge",
    "min_edge",
    "min_dual_edge",
    "min_triangle_area",
    "min_dual_cell_area",
    "nd_edge_ratio",
    "nd_triangle_ratio",
    "max_aspect_ratio",
    "error",
    "alt_error",
    "time_steps",
    "condition_number",
    "scaled_condition_number",
    "status",
];

#[derive(Clone, Debug, PartialEq)]
pub struct MeshStats {
    pub triangles: usize,
    pub nodes: usize,
    pub edges: usize,
    pub max_edge: f64,
    pub min_edge: f64,
    pub min_dual_edge: f64,
    pub min_triangle_area: f64,
    pub min_dual_cell_area: f64,
    pub nd_edge_ratio: f64,
    pub nd_triangle_ratio: f64,
    pub max_aspect_ratio: f64,
}

impl MeshStats {
    pub fn new(m: &SimplicialComplex2, metrics: &DualMetrics) -> Self {
        let q = m.quality_metrics();
        Self {
            triangles: m.num_triangles(),
            nodes: m.num_nodes(),
            edges: m.num_edges(),
            max_edge: q.max_edge_length,
            min_edge: q.min_edge_length,
            min_dual_edge: metrics.min_dual_edge_length(),
            min_triangle_area: q.min_triangle_area,
            min_dual_cell_area: metrics.min_dual_cell_area(),
            nd_edge_ratio: q.non_delaunay_edge_ratio,
            nd_triangle_ratio: q.non_delaunay_triangle_ratio,
            max_aspect_ratio: q.max_aspect_ratio,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelRow {
    pub level: usize,
    pub stats: MeshStats,
    pub error: f64,
    pub alt_error: Option<f64>,
    pub time_steps: Option<usize>,
    pub condition_number: Option<f64>,
    pub scaled_condition_number: Option<f64>,
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn fit_loglog(x: &[f64], y: &[f64]) -> Option<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|&v| v.is_nan() || v <= 0.0 || v.is_infinite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let residual = (lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    Some(SlopeFit { slope, intercept, residual })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub study: String,
    pub group: String,
    /// Coarse to fine, so the mesh size decreases down the table.
    pub rows: Vec<LevelRow>,
    pub fit: Option<SlopeFit>,
    pub failure: Option<String>,
}

impl ConvergenceReport {
    pub fn new(study: &str, group: &str) -> Self {
        Self { study: study.into(), group: group.into(), rows: Vec::new(), fit: None, failure: None }
    }

    pub fn refit(&mut self) {
        let h: Vec<f64> = self.rows.iter().map(|r| r.stats.max_edge).collect();
        let e: Vec<f64> = self.rows.iter().map(|r| r.error).collect();
        self.fit = fit_loglog(&h, &e);
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(REPORT_HEADER)?;
        for r in &self.rows {
            let s = &r.stats;
            out.write_record([
                r.level.to_string(),
                s.triangles.to_string(),
                s.nodes.to_string(),
                s.edges.to_string(),
                num(s.max_edge),
                num(s.min_edge),
                num(s.min_dual_edge),
                num(s.min_triangle_area),
                num(s.min_dual_cell_area),
                num(s.nd_edge_ratio),
                num(s.nd_triangle_ratio),
                num(s.max_aspect_ratio),
                num(r.error),
                opt(r.alt_error),
                r.time_steps.map(|n| n.to_string()).unwrap_or_default(),
                opt(r.condition_number),
                opt(r.scaled_condition_number),
                "ok".into(),
            ])?;
        }
        if let Some(reason) = &self.failure {
            let mut record = vec![String::new(); REPORT_HEADER.len()];
            record[0] = self.rows.len().to_string();
            record[REPORT_HEADER.len() - 1] = format!("failed: {reason}");
            out.write_record(&record)?;
        }
        out.flush()
    }

    pub fn write_fit_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["study", "group", "levels", "slope", "intercept", "residual"])?;
        let (slope, intercept, residual) = match self.fit {
            Some(f) => (num(f.slope), num(f.intercept), num(f.residual)),
            None => Default::default(),
        };
        out.write_record([
            self.study.clone(),
            self.group.clone(),
            self.rows.len().to_string(),
            slope,
            intercept,
            residual,
        ])?;
        out.flush()
    }

    pub fn write_files(&self, dir: &Path) -> io::Result<()> {
        write_atomic(&dir.join("report.csv"), |w| self.write_csv(w))?;
        write_atomic(&dir.join("fit.csv"), |w| self.write_fit_csv(w))
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.10e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
