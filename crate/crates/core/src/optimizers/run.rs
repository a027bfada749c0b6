use std::time::Instant;

use super::{Optimizer, OptimizerSpec};
use crate::error::Result;
use crate::rng::derive_seed;
use crate::tasks::TaskSpec;
use crate::theory::estimate_sigma;

const OPTIMIZER_STREAM: u64 = 1;
const TASK_STREAM: u64 = 2;
const DIAGNOSTIC_STREAM: u64 = 3;

/// Diagnostics and bookkeeping for [`run`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunOptions {
    /// Estimate the inverse-Hessian error every this many steps (LODO on tasks
    /// with a known Hessian only).
    pub sigma_every: Option<usize>,
    pub sigma_probes: usize,
    /// Keep per-step wall-clock times. Off by default so traces are
    /// reproducible bit for bit.
    pub record_wall_clock: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            sigma_every: None,
            sigma_probes: 100,
            record_wall_clock: false,
        }
    }
}

/// Everything recorded about one optimizer run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunRecord {
    pub optimizer: String,
    pub spec: OptimizerSpec,
    pub task: TaskSpec,
    pub seed: u64,
    pub steps: usize,
    /// Loss evaluated at every step, up to divergence.
    pub losses: Vec<f64>,
    /// `(step index, σ̂)` pairs.
    pub sigma: Vec<(usize, f64)>,
    /// Per-step optimizer time in milliseconds (empty unless requested).
    pub step_ms: Vec<f64>,
    /// Step index at which the run diverged, if it did.
    pub diverged_at: Option<usize>,
    /// Time spent in optimizer steps, excluding diagnostics.
    pub optimizer_seconds: f64,
}

impl RunRecord {
    pub fn steps_per_second(&self) -> f64 {
        if self.optimizer_seconds > 0.0 {
            self.losses.len() as f64 / self.optimizer_seconds
        } else {
            f64::NAN
        }
    }
}

/// Run `spec` on a fresh instance of `task` for `steps` steps.
///
/// The optimizer's initialization, the task's noise, and the diagnostic
/// probes draw from separate streams derived from `seed`, so turning
/// diagnostics on or off never changes the trajectory.
pub fn run(spec: &OptimizerSpec, task: &TaskSpec, steps: usize, seed: u64, opts: &RunOptions) -> Result<RunRecord> {
    let mut t = task.build(derive_seed(seed, &[TASK_STREAM]))?;
    let mut opt: Box<dyn Optimizer> = spec.build(t.initial_point(), derive_seed(seed, &[OPTIMIZER_STREAM]))?;
    let diag_seed = derive_seed(seed, &[DIAGNOSTIC_STREAM]);

    let mut losses = Vec::with_capacity(steps);
    let mut sigma = Vec::new();
    let mut step_ms = Vec::new();
    let mut diverged_at = None;
    let mut optimizer_seconds = 0.0;

    for i in 0..steps {
        let start = Instant::now();
        let out = opt.step(t.as_mut());
        let elapsed = start.elapsed().as_secs_f64();
        optimizer_seconds += elapsed;
        match out {
            Some(loss) => losses.push(loss),
            None => {
                diverged_at = Some(i);
                log::debug!("{} diverged at step {i} (seed {seed})", spec.label());
                break;
            }
        }
        if opts.record_wall_clock {
            step_ms.push(elapsed * 1e3);
        }
        if let (Some(every), Some(p), Some(h)) = (opts.sigma_every, opt.preconditioner(), t.hessian()) {
            if every > 0 && i % every == 0 {
                sigma.push((i, estimate_sigma(p, h, opts.sigma_probes, derive_seed(diag_seed, &[i as u64]))?));
            }
        }
    }

    Ok(RunRecord {
        optimizer: spec.label(),
        spec: spec.clone(),
        task: task.clone(),
        seed,
        steps,
        losses,
        sigma,
        step_ms,
        diverged_at,
        optimizer_seconds,
    })
}
