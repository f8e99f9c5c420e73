//! Data generation, evaluation metrics and the experiment runner.

pub mod config;
pub mod data;
pub mod experiment;
pub mod metrics;
pub mod target;

pub use config::{ExperimentConfig, KernelConfig, MethodConfig};
pub use data::{generate_dataset, generate_test_points, sample_dataset};
pub use experiment::{
    run_experiment, write_csv, write_csv_file, MetricsRow, RunOptions, CSV_HEADER,
};
pub use metrics::{
    empirical_excess_risk, exact_excess_risk, invariance_discrepancy, Discrepancy,
    DiscrepancyOptions,
};
pub use target::{Target, TargetSpec};
