//! The LODO update loop.
//!
//! Each step: move `x ← x − G(θ) m`, evaluate the task at the new point,
//! differentiate the new loss with respect to `θ` through that one step
//! (using the `m` that generated it), update `θ` with the meta-optimizer, then
//! fold the new gradient into the EMA `m ← β m + (1 − β) g`.

use super::adam::{AdamState, MetaOptimizer};
use super::{exceeds_divergence_threshold, Optimizer};
use crate::error::{check_dim, LodoError, Result};
use crate::gmat::{GNetConfig, Preconditioner, Variant, DEFAULT_BLOCK_SIZE, DEFAULT_DEPTH};
use crate::tasks::Task;

/// Meta-optimizer family used to train `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LodoConfig {
    pub variant: Variant,
    pub meta_lr: f64,
    pub beta: f64,
    pub alpha0: f64,
    pub block_size: usize,
    pub depth: usize,
    pub meta: MetaKind,
}

impl Default for LodoConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Full,
            meta_lr: 0.001,
            beta: 0.9,
            alpha0: 1.0,
            block_size: DEFAULT_BLOCK_SIZE,
            depth: DEFAULT_DEPTH,
            meta: MetaKind::Adam,
        }
    }
}

impl LodoConfig {
    /// Tuned settings for the noisy quadratic bowl.
    pub fn bowl(variant: Variant) -> Self {
        let (meta_lr, beta, alpha0) = match variant {
            Variant::Diagonal => (0.002886, 0.436, 1.080),
            Variant::Global => (0.004138, 0.431, 0.5999),
            Variant::Residual => (0.001971, 0.519, 0.8186),
            Variant::Full | Variant::Dense => (0.009600, 0.195, 0.270),
        };
        Self {
            variant,
            meta_lr,
            beta,
            alpha0,
            ..Self::default()
        }
    }

    /// Tuned settings for the Rosenbrock function.
    pub fn rosenbrock() -> Self {
        Self {
            meta_lr: 0.0001394,
            beta: 0.897,
            alpha0: 0.2946,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta) {
            return Err(LodoError::InvalidArgument(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if !(self.meta_lr >= 0.0 && self.meta_lr.is_finite()) {
            return Err(LodoError::InvalidArgument(format!("meta_lr must be >= 0, got {}", self.meta_lr)));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(LodoError::InvalidArgument(format!("alpha0 must be > 0, got {}", self.alpha0)));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self.variant {
            Variant::Full => "lodo".into(),
            v => format!("lodo-{}", v.name()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LodoState {
    x: Vec<f64>,
    m: Vec<f64>,
    precond: Preconditioner,
    meta: MetaOptimizer,
    beta: f64,
    t: u64,
    diverged: bool,
    grad: Vec<f64>,
}

impl LodoState {
    pub fn new(cfg: &LodoConfig, x0: Vec<f64>, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let gcfg = GNetConfig::new(x0.len())
            .block_size(cfg.block_size)
            .depth(cfg.depth)
            .alpha0(cfg.alpha0)
            .seed(seed);
        let precond = Preconditioner::build(cfg.variant, &gcfg)?;
        let meta = match cfg.meta {
            MetaKind::Adam => MetaOptimizer::Adam(AdamState::new(precond.num_params(), cfg.meta_lr)),
            MetaKind::Sgd => MetaOptimizer::Sgd { lr: cfg.meta_lr },
        };
        Self::with_preconditioner(precond, meta, cfg.beta, x0)
    }

    /// Start from an explicit preconditioner and meta-optimizer.
    pub fn with_preconditioner(precond: Preconditioner, meta: MetaOptimizer, beta: f64, x0: Vec<f64>) -> Result<Self> {
        check_dim(precond.dim(), x0.len())?;
        if !(0.0..1.0).contains(&beta) {
            return Err(LodoError::InvalidArgument(format!("beta must lie in [0, 1), got {beta}")));
        }
        let n = x0.len();
        Ok(Self {
            x: x0,
            m: vec![0.0; n],
            precond,
            meta,
            beta,
            t: 0,
            diverged: false,
            grad: vec![0.0; n],
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// The gradient EMA.
    pub fn momentum(&self) -> &[f64] {
        &self.m
    }

    pub fn preconditioner(&self) -> &Preconditioner {
        &self.precond
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }
}

impl Optimizer for LodoState {
    fn step(&mut self, task: &mut dyn Task) -> Option<f64> {
        if self.diverged {
            return None;
        }
        debug_assert_eq!(task.dim(), self.x.len());
        let step = self.precond.apply(&self.m).expect("dimension checked at construction");
        let x_new: Vec<f64> = self.x.iter().zip(&step).map(|(x, s)| x - s).collect();
        let loss = task.eval(&x_new, &mut self.grad);
        if exceeds_divergence_threshold(loss, &self.grad) {
            self.diverged = true;
            return None;
        }
        let hg = self.precond.hypergrad(&self.m, &self.grad).expect("dimension checked at construction");
        if !hg.is_finite() {
            self.diverged = true;
            return None;
        }
        self.x = x_new;
        self.meta.step(self.precond.params_mut(), hg.as_slice());
        let b = self.beta;
        self.m.iter_mut().zip(&self.grad).for_each(|(m, g)| *m = b * *m + (1.0 - b) * g);
        self.t += 1;
        Some(loss)
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn diverged(&self) -> bool {
        self.diverged
    }

    fn preconditioner(&self) -> Option<&Preconditioner> {
        Some(&self.precond)
    }
}
