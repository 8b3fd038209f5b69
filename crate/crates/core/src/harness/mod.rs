//! Manufactured problems, error norms, convergence studies and output.

pub mod config;
pub mod errors;
pub mod output;
pub mod problems;
pub mod rates;
pub mod study;

#[cfg(test)]
mod tests;

pub use config::{CoarseSpaceKind, LevelParams, RateScale, SolverKind, StudyConfig, TauValue};
pub use errors::{compute_errors, compute_errors_against, ErrorNorms, ErrorReport};
pub use output::write_solution_vtk;
pub use problems::{laminate_cell, problem, ExactSolution, ProblemSpec, REGISTRY};
pub use rates::{estimate_rates, Rate, EXACT_TOL};
pub use study::{run_convergence, LevelRun, Reference, RowStatus, Study, StudyResult, StudyRow, CSV_HEADER};
