//! Data loading, the experiment runner and CSV output behind the `duff` binary.

pub mod data;
pub mod experiment;
pub mod output;

pub use data::{gen_synthetic, ingest_csv, ColumnRef, Distribution};
pub use experiment::{
    run_experiment, run_experiment_detailed, DataSource, ExperimentConfig, ExperimentRecord,
};
pub use output::{read_csv, write_csv};
