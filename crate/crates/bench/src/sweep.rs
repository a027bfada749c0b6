//! LODO across momentum decays.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use lodo_core::gmat::Variant;
use lodo_core::optimizers::{run, LodoConfig, OptimizerSpec};
use lodo_core::stats;

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::suite::{run_options, run_seed, write_file};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub runs: usize,
    pub diverged: usize,
    /// Mean windowed loss over non-diverged runs.
    pub loss: f64,
}

pub const SWEEP_HEADER: &str = "beta,runs,diverged,loss";

/// The LODO settings the sweep varies: the config's first LODO optimizer,
/// else the bowl settings.
pub fn sweep_base(cfg: &ExperimentConfig) -> LodoConfig {
    cfg.optimizers
        .iter()
        .find_map(|o| match &o.spec {
            OptimizerSpec::Lodo(l) => Some(l.clone()),
            OptimizerSpec::Baseline(_) => None,
        })
        .unwrap_or_else(|| LodoConfig::bowl(Variant::Full))
}

pub fn momentum_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let betas = cfg
        .sweep
        .as_ref()
        .map(|s| s.betas.clone())
        .ok_or_else(|| BenchError::Config("no [sweep] section".into()))?;
    let base = sweep_base(cfg);
    let opts = run_options(cfg);
    let jobs: Vec<(usize, usize)> = (0..betas.len()).flat_map(|b| (0..cfg.seeds).map(move |k| (b, k))).collect();
    let values = jobs
        .par_iter()
        .map(|&(b, k)| {
            let spec = OptimizerSpec::Lodo(LodoConfig { beta: betas[b], ..base.clone() });
            let rec = run(&spec, &cfg.task, cfg.steps, run_seed(cfg.master_seed, k), &opts)?;
            Ok(crate::report::run_value(&rec.losses, rec.diverged_at.is_some(), &cfg.window))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(betas
        .iter()
        .enumerate()
        .map(|(b, &beta)| {
            let vals = &values[b * cfg.seeds..(b + 1) * cfg.seeds];
            let ok: Vec<f64> = vals.iter().flatten().copied().collect();
            SweepPoint {
                beta,
                runs: vals.len(),
                diverged: vals.len() - ok.len(),
                loss: stats::mean(&ok),
            }
        })
        .collect())
}

pub fn sweep_csv(config_text: &str, points: &[SweepPoint]) -> String {
    let mut out = String::new();
    crate::report::comment_block(&mut out, config_text);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.beta, p.runs, p.diverged, p.loss);
    }
    out
}

pub fn write_sweep(cfg: &ExperimentConfig, points: &[SweepPoint], dir: &Path) -> Result<()> {
    write_file(&dir.join("sweep.csv"), &sweep_csv(&cfg.render(), points))
}
