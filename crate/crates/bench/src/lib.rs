//! Experiment runner for hypergradient estimators: decay traces, efficiency
//! sweeps, inequality checks, CSV and SVG output, and the command-line tool.

pub mod checks;
pub mod cli;
pub mod config;
pub mod csv;
pub mod decay;
pub mod error;
pub mod slope;
pub mod svg;
pub mod sweep;

pub use cli::cli_main;
pub use config::{OuterKind, ProblemKind, RunConfig};
pub use decay::{run_decay, DecayRow, DecayTrace};
pub use error::{BenchError, Result};
pub use slope::fit_loglog_slope;
pub use sweep::{run_efficiency_sweep, Sweep, TrialReport};
