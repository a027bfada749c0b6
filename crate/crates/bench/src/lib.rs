//! Experiment harness for LODO: configs, optimizer × seed suites, summary
//! tables, and the momentum sweep. The `lodo` binary wraps these.

pub mod config;
pub mod error;
pub mod report;
pub mod suite;
pub mod sweep;

pub use config::{ExperimentConfig, NamedOptimizer};
pub use error::{BenchError, Result};
pub use report::{smooth_curve, SummaryRow};
pub use suite::{run_grid, run_suite, write_outputs};
pub use sweep::momentum_sweep;
