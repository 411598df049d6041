//! Experiment harness for `dec-core`: mesh-group sweeps, error and
//! conditioning reports, log-log plots and the double shear layer.

pub mod config;
pub mod convergence;
pub mod meshes;
pub mod output;
pub mod plot;
pub mod report;
pub mod shear;
pub mod studies;

pub use config::{CondnumMode, ExperimentConfig, MeshGroup, Study, UsageError};
pub use convergence::{run_condnum_study, run_convergence, CondnumRow};
pub use report::{ConvergenceReport, LevelRow, SlopeFit};
pub use shear::{run_shear_layer, ShearOutcome, ShearSettings};
