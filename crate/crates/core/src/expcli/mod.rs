//! Initial-data factories, the well-prepared, ill-prepared and eigen-gap
//! experiments, and the command-line front end.

mod audit;
mod cli;
mod data;
mod experiments;
mod table;

pub use audit::{experiment_eigen_audit, AuditRow, GapAudit};
pub use cli::cli_main;
pub use data::{build_initial_data, BranchWeights, InitialData, InitialDataSpec};
pub use experiments::{
    experiment_illprepared, experiment_wellprepared, illprepared_metric, wellprepared_error, ExperimentConfig,
};
pub use table::{fit_slope, ConvergenceRow, ConvergenceTable, SlopeFit};

/// First line of every CSV written by the front end.
pub fn version_header(what: &str) -> String {
    format!("# stratwave {} {}", env!("CARGO_PKG_VERSION"), what)
}
