//! Experiment runner behind the command-line tool.

mod config;
mod report;
mod study;

pub use config::{CaseConfig, ErrorStudyConfig, ExperimentConfig, FieldConfig, GeometryConfig, HybridForm, PrecondStudyConfig, SourceConfig};
pub use report::{
    emit_outputs, errors_csv, export_bases, flux_table, iterations_csv, parse_errors_csv, parse_iterations_csv, pressure_grid,
    run_error_study, run_fine_solve, run_precond_study, RunReport, ERRORS_HEADER, ITERATIONS_HEADER,
};
pub use study::{coarse_solve, error_rows, iteration_rows, ErrorRow, IterationRow, PrecondCase, SolverKind};
