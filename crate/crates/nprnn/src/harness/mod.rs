//! Experiment harness: declarative configs, the training loop, metrics and
//! checkpoint artifacts, the gradient-oracle protocol, and the CLI.

pub mod cli;
pub mod config;
pub mod gradcheck;
pub mod train;

pub use cli::run_cli;
pub use config::{mnist_dir, ExperimentConfig};
pub use gradcheck::{gradient_oracle, OracleLine};
pub use train::{
    evaluate, evaluate_rows, prepare_datasets, train, AbortInfo, MetricsRow, PreparedDataset,
    RunArtifacts, METRICS_HEADER,
};
