//! Batch experiment runners and their I/O surface: strict TOML configs,
//! deterministic result files, incremental cell persistence for `--resume`,
//! and the binary snapshot format.

pub mod config;
pub mod record;
pub mod runner;
pub mod snapshot;

pub use config::{ExperimentConfig, ExperimentKind, ModelConfig, OuCouplingStyle};
pub use record::{CellRow, ResultRecord, RunMetrics};
pub use runner::{run_experiment, wasserstein_between_snapshots, ExperimentOutcome};
pub use snapshot::Snapshot;
