//! Problem files, reports and the subcommand layer shared by the CLI and
//! the Python bindings.

pub mod commands;
pub mod plot;
pub mod problem;
pub mod report;

pub use commands::{analyze, coeff, critical_points, decompose, verify, RunError, RunOptions};
pub use plot::{plot_data, PlotDocument};
pub use problem::{Problem, ProblemError, ProblemFile};
pub use report::Report;
