use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dec_core::mesh::{read_mesh, write_mesh};
use dec_core::mesh_gen::{
    delaunay_unit_square, distort_to_non_delaunay, lift_sinusoidal, midpoint_subdivide, structured_grid, DistortionSpec,
};
use dec_core::{DualMetrics, SimplicialComplex2};
use dec_harness::config::{read_kv_file, CondnumMode, ExperimentConfig, MeshGroup, Study, UsageError};
use dec_harness::output::write_atomic;
use dec_harness::shear::{ShearSettings, DEFAULT_RESOLUTION, VORTEX_THRESHOLD};
use dec_harness::studies::run_level;
use dec_harness::{run_condnum_study, run_convergence, run_shear_layer};

/// Discrete exterior calculus experiments on triangle meshes.
///
/// Exit status: 0 on success, 1 on usage errors, 2 on numerical failures.
#[derive(Parser, Debug)]
#[command(name = "dec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a Delaunay mesh of the unit square as OFF.
    Gen {
        /// Approximate number of triangles.
        #[arg(long, default_value_t = 512)]
        triangles: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output OFF file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Displace nodes until a target fraction of edges is non-Delaunay.
    Distort {
        /// Input OFF mesh.
        #[arg(long)]
        input: PathBuf,
        /// Target non-Delaunay edge ratio, e.g. 0.05.
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split every triangle into four at its edge midpoints.
    Subdivide {
        #[arg(long)]
        input: PathBuf,
        /// Number of successive subdivisions.
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lift a flat mesh onto z = 0.1 sin(4πx) cos(4πy).
    Lift {
        /// Flat OFF mesh; when absent a structured grid is lifted.
        #[arg(long, conflicts_with = "resolution")]
        input: Option<PathBuf>,
        /// Cells per side of the structured grid.
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one study on a given mesh and write the solution as CSV.
    Solve {
        /// poisson0_primal, poisson0_dual, poisson1 or ns_poiseuille.
        #[arg(long)]
        study: Study,
        /// Input OFF mesh of the unit square.
        #[arg(long)]
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a refinement sweep and write report.csv, fit.csv and loglog.svg.
    Converge(ExperimentArgs),
    /// Condition numbers of a study's matrices over the four planar groups.
    Condnum(ExperimentArgs),
    /// Inviscid double shear layer on the lifted periodic surface.
    Shear {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Grid cells per side.
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        /// Vortex detection threshold as a fraction of the layer maximum of |ω|.
        #[arg(long, default_value_t = VORTEX_THRESHOLD)]
        threshold: f64,
    },
}

/// Flags override values read from `--config`.
#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Flat key=value file with any of: study, mesh_group, levels, seed, output_dir, condnum_mode.
    #[arg(long)]
    config: Option<PathBuf>,
    /// poisson0_primal, poisson0_dual, poisson1, ns_poiseuille or ns_shear_curved.
    #[arg(long)]
    study: Option<Study>,
    /// delaunay, nd1, nd5, nd15, subdivided or curved.
    #[arg(long)]
    group: Option<MeshGroup>,
    /// Number of refinement levels, 2 to 8. Level 4 has about 33k triangles.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// off, dense or estimate. `condnum` defaults to estimate.
    #[arg(long)]
    condnum: Option<CondnumMode>,
}

impl ExperimentArgs {
    fn resolve(&self, default_condnum: CondnumMode) -> Result<ExperimentConfig, UsageError> {
        let mut c = ExperimentConfig { condnum_mode: default_condnum, ..Default::default() };
        if let Some(path) = &self.config {
            c.apply(&read_kv_file(path)?)?;
        }
        if let Some(v) = self.study {
            c.study = v;
        }
        if let Some(v) = self.group {
            c.mesh_group = v;
        }
        if let Some(v) = self.levels {
            c.levels = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.condnum {
            c.condnum_mode = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn load(path: &Path) -> Result<SimplicialComplex2> {
    read_mesh(path).map_err(|e| UsageError(format!("cannot read mesh {}: {e}", path.display())).into())
}

fn save(m: &SimplicialComplex2, path: &Path) -> Result<()> {
    write_mesh(m, path).with_context(|| format!("writing {}", path.display()))?;
    let q = m.quality_metrics();
    println!(
        "{}: {} triangles, {} nodes, non-Delaunay edges {:.4}, triangles {:.4}, max aspect ratio {:.1}",
        path.display(),
        m.num_triangles(),
        m.num_nodes(),
        q.non_delaunay_edge_ratio,
        q.non_delaunay_triangle_ratio,
        q.max_aspect_ratio
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { triangles, seed, out } => save(&delaunay_unit_square(triangles, seed)?, &out),
        Command::Distort { input, ratio, seed, out } => {
            if !(0.0..1.0).contains(&ratio) {
                return Err(UsageError(format!("ratio must lie in [0, 1), got {ratio}")).into());
            }
            save(&distort_to_non_delaunay(&load(&input)?, &DistortionSpec::new(ratio, seed))?, &out)
        }
        Command::Subdivide { input, times, out } => {
            let mut m = load(&input)?;
            for _ in 0..times {
                m = midpoint_subdivide(&m)?;
            }
            save(&m, &out)
        }
        Command::Lift { input, resolution, out } => {
            let flat = match (input, resolution) {
                (Some(path), _) => load(&path)?,
                (None, Some(n)) => structured_grid(n)?,
                (None, None) => return Err(UsageError("lift needs --input or --resolution".into()).into()),
            };
            save(&lift_sinusoidal(&flat)?, &out)
        }
        Command::Solve { study, input, out } => {
            if study == Study::NsShearCurved {
                return Err(UsageError("use the shear subcommand for ns_shear_curved".into()).into());
            }
            let m = load(&input)?;
            let metrics = DualMetrics::new(&m)?;
            let outcome = run_level(study, &m, &metrics)?;
            write_atomic(&out.join("solution.csv"), |w| outcome.solution.write_csv(w))?;
            println!("{study}: error {:.6e}", outcome.error);
            if let Some(alt) = outcome.alt_error {
                println!("{study}: alternative error {alt:.6e}");
            }
            Ok(())
        }
        Command::Converge(args) => {
            let config = args.resolve(CondnumMode::Off)?;
            let report = run_convergence(&config)?;
            for r in &report.rows {
                println!(
                    "level {} triangles {:>6} max edge {:.4e} error {:.4e}",
                    r.level, r.stats.triangles, r.stats.max_edge, r.error
                );
            }
            if let Some(f) = report.fit {
                println!("slope {:.3} (residual {:.3e})", f.slope, f.residual);
            }
            Ok(())
        }
        Command::Condnum(args) => {
            let config = args.resolve(CondnumMode::Estimate)?;
            for r in run_condnum_study(&config)? {
                println!("{:>8} level {} {:<18} {:.4e}", r.group, r.level, r.matrix, r.condition_number);
            }
            Ok(())
        }
        Command::Shear { out, resolution, threshold } => {
            if resolution < 4 || !(threshold > 0.0 && threshold < 1.0) {
                return Err(UsageError("shear needs resolution >= 4 and threshold in (0, 1)".into()).into());
            }
            let outcome = run_shear_layer(&ShearSettings { resolution, output_dir: out, threshold })?;
            for s in &outcome.snapshots {
                println!(
                    "t = {:.2}: max |w| {:.4}, vortices lower {} upper {}",
                    s.time, s.max_vorticity, s.vortex_counts[0], s.vortex_counts[1]
                );
            }
            println!("relative circulation drift {:.3e}", outcome.relative_circulation_drift());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e:#}");
            eprintln!("run `dec --help` for usage");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
