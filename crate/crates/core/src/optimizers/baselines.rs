//! First-order baselines: Adam, heavy-ball momentum, RMSprop with momentum,
//! and Yogi.

use super::{exceeds_divergence_threshold, Optimizer};
use crate::error::{LodoError, Result};
use crate::tasks::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Adam,
    Momentum,
    RmsProp,
    Yogi,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [BaselineKind::Adam, BaselineKind::Momentum, BaselineKind::RmsProp, BaselineKind::Yogi];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Adam => "adam",
            BaselineKind::Momentum => "momentum",
            BaselineKind::RmsProp => "rmsprop",
            BaselineKind::Yogi => "yogi",
        }
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = LodoError;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LodoError::InvalidArgument(format!("unknown baseline `{s}`")))
    }
}

/// Hyperparameters of a baseline. `rho` is the weight given to the newest
/// squared gradient in RMSprop's variance average.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum BaselineConfig {
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    Momentum { lr: f64, beta: f64 },
    #[serde(rename = "rmsprop")]
    RmsProp { lr: f64, rho: f64, beta: f64, eps: f64 },
    Yogi { lr: f64, beta1: f64, beta2: f64, eps: f64 },
}

pub const ADAM_EPS: f64 = 1e-8;
pub const RMSPROP_EPS: f64 = 1e-7;
pub const YOGI_EPS: f64 = 1e-3;

impl BaselineConfig {
    /// Library defaults, the tuner's starting point.
    pub fn defaults(kind: BaselineKind) -> Self {
        match kind {
            BaselineKind::Adam => Self::Adam {
                lr: 0.001,
                beta1: 0.9,
                beta2: 0.999,
                eps: ADAM_EPS,
            },
            BaselineKind::Momentum => Self::Momentum { lr: 0.01, beta: 0.9 },
            BaselineKind::RmsProp => Self::RmsProp {
                lr: 0.001,
                rho: 0.1,
                beta: 0.0,
                eps: RMSPROP_EPS,
            },
            BaselineKind::Yogi => Self::Yogi {
                lr: 0.01,
                beta1: 0.9,
                beta2: 0.999,
                eps: YOGI_EPS,
            },
        }
    }

    /// Tuned settings for the noisy quadratic bowl.
    pub fn bowl(kind: BaselineKind) -> Self {
        match kind {
            BaselineKind::Adam => Self::Adam {
                lr: 1.164,
                beta1: 0.465,
                beta2: 0.9884,
                eps: ADAM_EPS,
            },
            BaselineKind::Momentum => Self::Momentum { lr: 1.394, beta: 0.529 },
            BaselineKind::RmsProp => Self::RmsProp {
                lr: 0.449,
                rho: 0.04943,
                beta: 0.595,
                eps: RMSPROP_EPS,
            },
            BaselineKind::Yogi => Self::Yogi {
                lr: 2.169,
                beta1: 0.4362,
                beta2: 0.9999723,
                eps: YOGI_EPS,
            },
        }
    }

    /// Tuned settings for the Rosenbrock function.
    pub fn rosenbrock(kind: BaselineKind) -> Self {
        match kind {
            BaselineKind::Adam => Self::Adam {
                lr: 0.9704,
                beta1: 0.864,
                beta2: 0.99804,
                eps: ADAM_EPS,
            },
            BaselineKind::Momentum => Self::Momentum { lr: 0.09870, beta: 0.9359 },
            BaselineKind::RmsProp => Self::RmsProp {
                lr: 0.004318,
                rho: 0.02836,
                beta: 0.880,
                eps: RMSPROP_EPS,
            },
            BaselineKind::Yogi => Self::Yogi {
                lr: 0.2991,
                beta1: 0.9273,
                beta2: 0.998787,
                eps: YOGI_EPS,
            },
        }
    }

    pub fn kind(&self) -> BaselineKind {
        match self {
            Self::Adam { .. } => BaselineKind::Adam,
            Self::Momentum { .. } => BaselineKind::Momentum,
            Self::RmsProp { .. } => BaselineKind::RmsProp,
            Self::Yogi { .. } => BaselineKind::Yogi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let decay = |name: &str, v: f64| {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(LodoError::InvalidArgument(format!("{name} must lie in [0, 1), got {v}")))
            }
        };
        let lr = |v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LodoError::InvalidArgument(format!("learning rate must be > 0, got {v}")))
            }
        };
        match *self {
            Self::Adam { lr: l, beta1, beta2, .. } | Self::Yogi { lr: l, beta1, beta2, .. } => {
                lr(l)?;
                decay("beta1", beta1)?;
                decay("beta2", beta2)
            }
            Self::Momentum { lr: l, beta } => {
                lr(l)?;
                decay("beta", beta)
            }
            Self::RmsProp { lr: l, rho, beta, .. } => {
                lr(l)?;
                if !(rho > 0.0 && rho <= 1.0) {
                    return Err(LodoError::InvalidArgument(format!("rho must lie in (0, 1], got {rho}")));
                }
                decay("beta", beta)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineState {
    config: BaselineConfig,
    x: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    t: u64,
    diverged: bool,
    grad: Vec<f64>,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl BaselineState {
    pub fn new(config: BaselineConfig, x0: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let n = x0.len();
        Ok(Self {
            config,
            x: x0,
            first: vec![0.0; n],
            second: vec![0.0; n],
            t: 0,
            diverged: false,
            grad: vec![0.0; n],
        })
    }

    pub fn config(&self) -> &BaselineConfig {
        &self.config
    }

    /// Apply one update for gradient `g` evaluated at the current point.
    pub fn update(&mut self, g: &[f64]) {
        self.t += 1;
        let t = self.t as i32;
        match self.config {
            BaselineConfig::Adam { lr, beta1, beta2, eps } => {
                let bc1 = 1.0 - beta1.powi(t);
                let bc2 = 1.0 - beta2.powi(t);
                for i in 0..self.x.len() {
                    self.first[i] = beta1 * self.first[i] + (1.0 - beta1) * g[i];
                    self.second[i] = beta2 * self.second[i] + (1.0 - beta2) * g[i] * g[i];
                    self.x[i] -= lr * (self.first[i] / bc1) / ((self.second[i] / bc2).sqrt() + eps);
                }
            }
            BaselineConfig::Momentum { lr, beta } => {
                // heavy ball: v ← β v + g, x ← x − lr v
                for i in 0..self.x.len() {
                    self.first[i] = beta * self.first[i] + g[i];
                    self.x[i] -= lr * self.first[i];
                }
            }
            BaselineConfig::RmsProp { lr, rho, beta, eps } => {
                // s ← (1 − ρ) s + ρ g², v ← β v + lr g / √(s + eps), x ← x − v
                for i in 0..self.x.len() {
                    self.second[i] = (1.0 - rho) * self.second[i] + rho * g[i] * g[i];
                    self.first[i] = beta * self.first[i] + lr * g[i] / (self.second[i] + eps).sqrt();
                    self.x[i] -= self.first[i];
                }
            }
            BaselineConfig::Yogi { lr, beta1, beta2, eps } => {
                let bc1 = 1.0 - beta1.powi(t);
                let bc2 = 1.0 - beta2.powi(t);
                for i in 0..self.x.len() {
                    let g2 = g[i] * g[i];
                    self.first[i] = beta1 * self.first[i] + (1.0 - beta1) * g[i];
                    self.second[i] -= (1.0 - beta2) * sign(self.second[i] - g2) * g2;
                    self.x[i] -= lr * (self.first[i] / bc1) / ((self.second[i] / bc2).sqrt() + eps);
                }
            }
        }
    }
}

impl Optimizer for BaselineState {
    fn step(&mut self, task: &mut dyn Task) -> Option<f64> {
        if self.diverged {
            return None;
        }
        let loss = task.eval(&self.x, &mut self.grad);
        if exceeds_divergence_threshold(loss, &self.grad) {
            self.diverged = true;
            return None;
        }
        let g = std::mem::take(&mut self.grad);
        let x_prev = self.x.clone();
        self.update(&g);
        self.grad = g;
        if self.x.iter().any(|v| !v.is_finite()) {
            self.x = x_prev;
            self.diverged = true;
            return None;
        }
        Some(loss)
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn diverged(&self) -> bool {
        self.diverged
    }
}
