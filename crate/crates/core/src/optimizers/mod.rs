//! Optimizers: LODO and the first-order baselines it is compared against.

mod adam;
mod baselines;
mod lodo;
mod run;

pub use adam::{AdamState, MetaOptimizer};
pub use baselines::{BaselineConfig, BaselineKind, BaselineState, ADAM_EPS, RMSPROP_EPS, YOGI_EPS};
pub use lodo::{LodoConfig, LodoState, MetaKind};
pub use run::{run, RunOptions, RunRecord};

use crate::error::{LodoError, Result};
use crate::gmat::Preconditioner;
use crate::tasks::Task;
use crate::tuner::{HyperKind, HyperParam, HyperSpace};

/// Losses above this are treated as divergence.
pub const DIVERGENCE_LOSS: f64 = 1e12;

pub(crate) fn exceeds_divergence_threshold(loss: f64, grad: &[f64]) -> bool {
    !loss.is_finite() || loss > DIVERGENCE_LOSS || grad.iter().any(|g| !g.is_finite())
}

/// One optimizer instance driving one task.
pub trait Optimizer: Send {
    /// Take one step, returning the loss evaluated during it, or `None` once
    /// the optimizer has diverged. Divergence is permanent.
    fn step(&mut self, task: &mut dyn Task) -> Option<f64>;

    fn x(&self) -> &[f64];

    fn diverged(&self) -> bool;

    fn preconditioner(&self) -> Option<&Preconditioner> {
        None
    }
}

/// Any optimizer this crate can build, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum OptimizerSpec {
    Lodo(LodoConfig),
    Baseline(BaselineConfig),
}

impl OptimizerSpec {
    pub fn build(&self, x0: Vec<f64>, seed: u64) -> Result<Box<dyn Optimizer>> {
        Ok(match self {
            OptimizerSpec::Lodo(cfg) => Box::new(LodoState::new(cfg, x0, seed)?),
            OptimizerSpec::Baseline(cfg) => Box::new(BaselineState::new(*cfg, x0)?),
        })
    }

    pub fn label(&self) -> String {
        match self {
            OptimizerSpec::Lodo(cfg) => cfg.label(),
            OptimizerSpec::Baseline(cfg) => cfg.kind().name().to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OptimizerSpec::Lodo(cfg) => cfg.validate(),
            OptimizerSpec::Baseline(cfg) => cfg.validate(),
        }
    }

    /// The tunable hyperparameters and their current values.
    pub fn hyperparameters(&self) -> Vec<(HyperParam, f64)> {
        use HyperKind::*;
        let p = |name: &str, kind| HyperParam::new(name, kind);
        match *self {
            OptimizerSpec::Lodo(ref c) => vec![
                (p("meta_lr", LearningRate), c.meta_lr),
                (p("beta", Decay), c.beta),
                (p("alpha0", LearningRate), c.alpha0),
            ],
            OptimizerSpec::Baseline(BaselineConfig::Adam { lr, beta1, beta2, .. })
            | OptimizerSpec::Baseline(BaselineConfig::Yogi { lr, beta1, beta2, .. }) => vec![
                (p("lr", LearningRate), lr),
                (p("beta1", Decay), beta1),
                (p("beta2", Decay), beta2),
            ],
            OptimizerSpec::Baseline(BaselineConfig::Momentum { lr, beta }) => {
                vec![(p("lr", LearningRate), lr), (p("beta", Decay), beta)]
            }
            OptimizerSpec::Baseline(BaselineConfig::RmsProp { lr, rho, beta, .. }) => vec![
                (p("lr", LearningRate), lr),
                (p("rho", Decay), rho),
                (p("beta", Decay), beta),
            ],
        }
    }

    pub fn hyper_space(&self) -> HyperSpace {
        HyperSpace::new(self.hyperparameters().into_iter().map(|(h, _)| h).collect())
    }

    pub fn hyper_values(&self) -> Vec<f64> {
        self.hyperparameters().into_iter().map(|(_, v)| v).collect()
    }

    /// Same optimizer with its tunable hyperparameters replaced, in the order
    /// of [`Self::hyperparameters`].
    pub fn with_hyperparameters(&self, values: &[f64]) -> Result<Self> {
        let expected = self.hyperparameters().len();
        if values.len() != expected {
            return Err(LodoError::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        let v = values;
        let out = match self.clone() {
            OptimizerSpec::Lodo(c) => OptimizerSpec::Lodo(LodoConfig {
                meta_lr: v[0],
                beta: v[1],
                alpha0: v[2],
                ..c
            }),
            OptimizerSpec::Baseline(b) => OptimizerSpec::Baseline(match b {
                BaselineConfig::Adam { eps, .. } => BaselineConfig::Adam {
                    lr: v[0],
                    beta1: v[1],
                    beta2: v[2],
                    eps,
                },
                BaselineConfig::Yogi { eps, .. } => BaselineConfig::Yogi {
                    lr: v[0],
                    beta1: v[1],
                    beta2: v[2],
                    eps,
                },
                BaselineConfig::Momentum { .. } => BaselineConfig::Momentum { lr: v[0], beta: v[1] },
                BaselineConfig::RmsProp { eps, .. } => BaselineConfig::RmsProp {
                    lr: v[0],
                    rho: v[1],
                    beta: v[2],
                    eps,
                },
            }),
        };
        Ok(out)
    }
}
