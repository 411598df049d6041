//! Convergence sweeps and condition-number sweeps over mesh groups.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use dec_core::mesh::write_mesh;
use dec_core::sparse::{condition_number, CondMode};
use dec_core::{DualMetrics, SparseMatrix};

use crate::config::{CondnumMode, ExperimentConfig, MeshGroup, Study, UsageError};
use crate::meshes::build_level;
use crate::output::{write_atomic, write_string_atomic};
use crate::plot::{LogLogPlot, Series};
use crate::report::{num, ConvergenceReport, LevelRow, MeshStats};
use crate::studies::{run_level, stiffness_matrices};

fn cond_mode(mode: CondnumMode) -> Option<CondMode> {
    match mode {
        CondnumMode::Off => None,
        CondnumMode::Dense => Some(CondMode::DenseSvd),
        CondnumMode::Estimate => Some(CondMode::Estimate),
    }
}

/// Expected slope of each study's error, used for the guide line.
pub fn expected_slope(study: Study, group: MeshGroup) -> f64 {
    match (study, group) {
        (Study::Poisson0Primal, _) | (Study::NsPoiseuille, MeshGroup::Subdivided) => 2.0,
        _ => 1.0,
    }
}

/// Solve `config.study` on every level of `config.mesh_group`, writing meshes,
/// solutions, `report.csv`, `fit.csv` and `loglog.svg` into `config.output_dir`.
///
/// A failing level stops the sweep; the rows computed so far are still written,
/// followed by a failure marker row.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    if config.study == Study::NsShearCurved {
        return Err(UsageError("ns_shear_curved is run by the `shear` subcommand".into()).into());
    }
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_string_atomic(&dir.join("config.txt"), &config.to_kv())?;
    let mut report = ConvergenceReport::new(config.study.as_str(), config.mesh_group.as_str());
    for level in 0..config.levels {
        match convergence_level(config, level, dir) {
            Ok(row) => {
                log::info!("{} {} level {level}: error {:.4e}", config.study, config.mesh_group, row.error);
                report.rows.push(row);
            }
            Err(e) => {
                report.failure = Some(format!("{e:#}").replace('\n', " "));
                report.refit();
                report.write_files(dir)?;
                return Err(e.context(format!("level {level}")));
            }
        }
    }
    report.refit();
    report.write_files(dir)?;
    let plot = LogLogPlot {
        title: format!("{} on {}", config.study, config.mesh_group),
        x_label: "maximum primal edge length".into(),
        y_label: "L2 error".into(),
        series: vec![Series::new(
            format!("{} (slope {:.2})", config.mesh_group, report.slope().unwrap_or(f64::NAN)),
            report.rows.iter().map(|r| (r.stats.max_edge, r.error)).collect(),
        )],
        reference_slopes: vec![expected_slope(config.study, config.mesh_group)],
    };
    write_string_atomic(&dir.join("loglog.svg"), &plot.to_svg())?;
    Ok(report)
}

fn convergence_level(config: &ExperimentConfig, level: usize, dir: &Path) -> Result<LevelRow> {
    let m = build_level(config.mesh_group, level, config.seed)?;
    write_mesh(&m, dir.join(format!("mesh_level{level}.off")))?;
    let metrics = DualMetrics::new(&m)?;
    let outcome = run_level(config.study, &m, &metrics)?;
    write_atomic(&dir.join(format!("solution_level{level}.csv")), |w| outcome.solution.write_csv(w))?;
    let (mut condition_number, mut scaled_condition_number) = (None, None);
    if let Some(mode) = cond_mode(config.condnum_mode) {
        let matrices = stiffness_matrices(config.study, &m, &metrics)?;
        condition_number = Some(cond(&matrices[0].1, mode)?);
        if let Some((_, scaled)) = matrices.get(1) {
            scaled_condition_number = Some(cond(scaled, mode)?);
        }
    }
    Ok(LevelRow {
        level,
        stats: MeshStats::new(&m, &metrics),
        error: outcome.error,
        alt_error: outcome.alt_error,
        time_steps: outcome.time_steps,
        condition_number,
        scaled_condition_number,
    })
}

fn cond(a: &SparseMatrix, mode: CondMode) -> Result<f64> {
    condition_number(a, mode).map_err(|e| anyhow!(e).context(format!("condition number of a {}-row matrix", a.nrows())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondnumRow {
    pub group: String,
    pub level: usize,
    pub triangles: usize,
    pub min_edge: f64,
    pub max_edge: f64,
    pub matrix: String,
    pub condition_number: f64,
}

/// Condition numbers of the study's matrices on every level of the four planar
/// groups, plus an identity sanity row, written to `condnum.csv` and `condnum.svg`.
pub fn run_condnum_study(config: &ExperimentConfig) -> Result<Vec<CondnumRow>> {
    config.validate()?;
    let mode = cond_mode(config.condnum_mode)
        .ok_or_else(|| UsageError("condnum needs condnum_mode dense or estimate, not off".into()))?;
    if config.study == Study::NsShearCurved {
        return Err(UsageError("no condition-number study for ns_shear_curved".into()).into());
    }
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_string_atomic(&dir.join("config.txt"), &config.to_kv())?;
    let mut rows = vec![CondnumRow {
        group: "identity".into(),
        level: 0,
        triangles: 0,
        min_edge: 1.0,
        max_edge: 1.0,
        matrix: "identity".into(),
        condition_number: cond(&SparseMatrix::identity(16), mode)?,
    }];
    for group in MeshGroup::PLANAR {
        for level in 0..config.levels {
            let m = build_level(group, level, config.seed)?;
            let metrics = DualMetrics::new(&m)?;
            let q = m.quality_metrics();
            for (label, a) in stiffness_matrices(config.study, &m, &metrics)? {
                let c = cond(&a, mode).with_context(|| format!("{group} level {level} {label}"))?;
                log::info!("{group} level {level} {label}: condition number {c:.3e}");
                rows.push(CondnumRow {
                    group: group.to_string(),
                    level,
                    triangles: m.num_triangles(),
                    min_edge: q.min_edge_length,
                    max_edge: q.max_edge_length,
                    matrix: label.to_string(),
                    condition_number: c,
                });
            }
        }
    }
    write_atomic(&dir.join("condnum.csv"), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["group", "level", "triangles", "min_edge", "max_edge", "matrix", "condition_number"])?;
        for r in &rows {
            out.write_record([
                r.group.clone(),
                r.level.to_string(),
                r.triangles.to_string(),
                num(r.min_edge),
                num(r.max_edge),
                r.matrix.clone(),
                num(r.condition_number),
            ])?;
        }
        out.flush()
    })?;
    let mut series = Vec::new();
    for group in MeshGroup::PLANAR {
        let mut labels: Vec<&str> =
            rows.iter().filter(|r| r.group == group.as_str()).map(|r| r.matrix.as_str()).collect();
        labels.dedup();
        for (k, label) in labels.iter().enumerate() {
            let points = rows
                .iter()
                .filter(|r| r.group == group.as_str() && r.matrix == *label)
                .map(|r| (r.min_edge, r.condition_number))
                .collect();
            series.push(Series { label: format!("{group} {label}"), points, dashed: k > 0 });
        }
    }
    let plot = LogLogPlot {
        title: format!("condition numbers, {}", config.study),
        x_label: "minimum primal edge length".into(),
        y_label: "condition number".into(),
        series,
        reference_slopes: vec![-2.0],
    };
    write_string_atomic(&dir.join("condnum.svg"), &plot.to_svg())?;
    Ok(rows)
}
