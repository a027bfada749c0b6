//! Loss-and-gradient oracles.

mod bowl;
mod rosenbrock;

use nalgebra::DMatrix;

pub use bowl::{draw_offset, geometric_spectrum, noise_stream, BowlConfig, NoisyQuadraticBowl};
pub use rosenbrock::{rosenbrock_eval, Rosenbrock, ROSENBROCK_START};

use crate::error::Result;

/// A (possibly stochastic) objective evaluated once per optimizer step.
pub trait Task: Send {
    fn dim(&self) -> usize;

    fn initial_point(&self) -> Vec<f64>;

    /// Evaluate the loss at `x` and write the gradient into `grad`.
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64;

    /// The (constant) Hessian, when the task has one. Used for diagnostics.
    fn hessian(&self) -> Option<&DMatrix<f64>> {
        None
    }
}

/// Declarative description of a task, as found in experiment configs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TaskSpec {
    Bowl(BowlConfig),
    Rosenbrock,
}

impl TaskSpec {
    /// Instantiate the task. `noise_seed` drives per-run randomness only; the
    /// bowl's Hessian comes from its own config seed.
    pub fn build(&self, noise_seed: u64) -> Result<Box<dyn Task>> {
        Ok(match self {
            TaskSpec::Bowl(cfg) => Box::new(NoisyQuadraticBowl::new(cfg, noise_seed)?),
            TaskSpec::Rosenbrock => Box::new(Rosenbrock),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Bowl(_) => "bowl",
            TaskSpec::Rosenbrock => "rosenbrock",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TaskSpec::Bowl(cfg) => cfg.dim,
            TaskSpec::Rosenbrock => 2,
        }
    }
}
