//! Optimizer × seed grids and their output files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use lodo_core::optimizers::{run, RunOptions, RunRecord};
use lodo_core::rng::derive_seed;

use crate::config::ExperimentConfig;
use crate::error::{io_err, Result};
use crate::report::{self, SummaryRow, SCHEMA_VERSION};

/// Seed of the `k`-th run; every optimizer sees the same seeds.
pub fn run_seed(master: u64, k: usize) -> u64 {
    derive_seed(master, &[k as u64])
}

#[derive(Debug, Clone)]
pub struct GridRun {
    pub label: String,
    pub seed_index: usize,
    pub record: RunRecord,
}

impl GridRun {
    pub fn value(&self, cfg: &ExperimentConfig) -> Option<f64> {
        report::run_value(&self.record.losses, self.record.diverged_at.is_some(), &cfg.window)
    }
}

pub fn run_options(cfg: &ExperimentConfig) -> RunOptions {
    RunOptions {
        sigma_every: cfg.sigma_every,
        sigma_probes: cfg.sigma_probes,
        record_wall_clock: cfg.wall_clock,
    }
}

/// Run every optimizer on every seed, in parallel. Results come back in
/// config order, seeds ascending.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<GridRun>> {
    cfg.validate()?;
    let opts = run_options(cfg);
    let jobs: Vec<(usize, usize)> = (0..cfg.optimizers.len())
        .flat_map(|o| (0..cfg.seeds).map(move |k| (o, k)))
        .collect();
    jobs.par_iter()
        .map(|&(o, k)| {
            let opt = &cfg.optimizers[o];
            let record = run(&opt.spec, &cfg.task, cfg.steps, run_seed(cfg.master_seed, k), &opts)?;
            log::info!("{} seed {k}: {} steps", opt.label, record.losses.len());
            Ok(GridRun {
                label: opt.label.clone(),
                seed_index: k,
                record,
            })
        })
        .collect()
}

pub fn summary_rows(cfg: &ExperimentConfig, runs: &[GridRun]) -> Vec<SummaryRow> {
    let mut rows = report::summarize(runs.iter().map(|r| (r.label.as_str(), r.value(cfg))));
    for row in &mut rows {
        let rates: Vec<f64> = runs
            .iter()
            .filter(|r| r.label == row.optimizer)
            .map(|r| r.record.steps_per_second())
            .filter(|x| x.is_finite())
            .collect();
        if !rates.is_empty() {
            row.steps_per_second = Some(lodo_core::stats::mean(&rates));
        }
    }
    rows
}

#[derive(Debug, serde::Serialize)]
struct RunEntry<'a> {
    optimizer: &'a str,
    seed_index: usize,
    seed: u64,
    steps_completed: usize,
    diverged_at: Option<usize>,
    value: Option<f64>,
    steps_per_second: f64,
    curve: String,
}

#[derive(Debug, serde::Serialize)]
struct SummaryJson<'a> {
    schema_version: u32,
    name: &'a str,
    config: String,
    rows: &'a [SummaryRow],
    runs: Vec<RunEntry<'a>>,
}

pub fn curve_file_name(label: &str, seed_index: usize) -> String {
    format!("{label}_seed{seed_index}.csv")
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))
}

/// Write curves, `summary.csv`, and `summary.json` under `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, runs: &[GridRun], dir: &Path) -> Result<Vec<SummaryRow>> {
    let text = cfg.render();
    let rows = summary_rows(cfg, runs);
    let mut entries = Vec::with_capacity(runs.len());
    for r in runs {
        let name = curve_file_name(&r.label, r.seed_index);
        write_file(&dir.join("curves").join(&name), &report::curve_csv(&text, &r.label, r.seed_index, &r.record))?;
        entries.push(RunEntry {
            optimizer: &r.label,
            seed_index: r.seed_index,
            seed: r.record.seed,
            steps_completed: r.record.losses.len(),
            diverged_at: r.record.diverged_at,
            value: r.value(cfg),
            steps_per_second: r.record.steps_per_second(),
            curve: format!("curves/{name}"),
        });
    }
    write_file(&dir.join("summary.csv"), &report::summary_csv(&text, &rows))?;
    let json = SummaryJson {
        schema_version: SCHEMA_VERSION,
        name: &cfg.name,
        config: text,
        rows: &rows,
        runs: entries,
    };
    let mut s = serde_json::to_string_pretty(&json)?;
    s.push('\n');
    write_file(&dir.join("summary.json"), &s)?;
    Ok(rows)
}

/// Output directory: the config's, else `fallback`.
pub fn output_dir(cfg: &ExperimentConfig, fallback: &Path) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| fallback.to_path_buf())
}

/// Validate, run the grid, and write every output file. Nothing is written
/// when the config is invalid.
pub fn run_suite(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<SummaryRow>> {
    cfg.validate()?;
    let runs = run_grid(cfg)?;
    write_outputs(cfg, &runs, dir)
}
