//! Monte Carlo harness, figure presets and CSV output.

pub mod config;
pub mod csv;
pub mod harness;
pub mod presets;
pub mod stats;

pub use config::{CellSpec, ExperimentConfig, Scenario, Sweep, SweepParam};
pub use csv::{emit_csv, write_csv_file, HEADER};
pub use harness::{
    run_cell, run_experiment, run_period, run_period_perceived, select, sort_rows, Execution,
    ResultRow,
};
pub use presets::{preset, PRESETS};
