//! Config-driven experiment running: typed TOML configs, canonical
//! reproductions of the studied comparisons, JSON + CSV reports, and
//! checkpoint persistence.

pub mod checkpoint;
pub mod config;
pub mod report;
pub mod runner;

pub use checkpoint::{PqaeCheckpoint, StackCheckpoint};
pub use config::{
    canonical, DatasetSection, ExperimentConfig, ExperimentKind, ExperimentSection, ModelKind,
    ModelSpec, SplitSection, VqcEncoding, FIG7_VARIANTS,
};
pub use report::{ExperimentReport, ReportRow, SeedMetric, Selection};
pub use runner::{encode_with_checkpoint, run_experiment, run_reproduce, DirLock};
