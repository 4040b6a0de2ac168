//! Figure presets, CSV output and the acceptance suite.

pub mod acceptance;
mod config;
mod records;
mod run;
mod solve;

pub use config::{ExperimentConfig, ExperimentPlan, Preset, DEFAULT_DEPHASING, TWO_QUBIT_T_END};
pub use records::{format_number, sort_records, to_csv_string, write_csv, ObservableRecord, CSV_HEADER};
pub use run::{run_plan, run_preset};
pub use solve::{fit_inverse_n, full_liouvillian, solve_full, solve_sector, SectorSolution};
