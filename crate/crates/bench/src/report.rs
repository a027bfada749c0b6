//! Summary statistics, curve files, and reading them back.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use lodo_core::optimizers::RunRecord;
use lodo_core::stats::{self, Window};

use crate::error::{io_err, BenchError, Result};

pub const CURVE_HEADER: &str = "step,loss,sigma,wall_clock_ms";
pub const SUMMARY_HEADER: &str = "optimizer,runs,diverged,mean,std";
pub const SCHEMA_VERSION: u32 = 1;

/// Non-overlapping block means; a trailing partial block is averaged over
/// its own length.
pub fn smooth_curve(losses: &[f64], block: usize) -> Vec<f64> {
    assert!(block >= 1, "block must be at least 1");
    losses.chunks(block).map(stats::mean).collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SummaryRow {
    pub optimizer: String,
    pub runs: usize,
    pub diverged: usize,
    /// Mean over runs of each run's windowed loss; diverged runs are left out.
    pub mean: f64,
    /// Standard deviation across runs of the same per-run values.
    pub std: f64,
    /// Mean optimizer throughput, excluding diagnostics. Absent when no run
    /// was timed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_second: Option<f64>,
}

/// The statistic one run contributes to its row, or `None` if it diverged.
pub fn run_value(losses: &[f64], diverged: bool, window: &Window) -> Option<f64> {
    if diverged {
        None
    } else {
        Some(window.mean(losses))
    }
}

/// Fold `(optimizer, run value)` pairs into rows, keeping first-seen order.
pub fn summarize<'a>(values: impl IntoIterator<Item = (&'a str, Option<f64>)>) -> Vec<SummaryRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for (name, v) in values {
        let entry = groups.entry(name).or_insert_with(|| {
            order.push(name);
            (Vec::new(), 0)
        });
        match v {
            Some(v) => entry.0.push(v),
            None => entry.1 += 1,
        }
    }
    order
        .into_iter()
        .map(|name| {
            let (vals, diverged) = &groups[name];
            SummaryRow {
                optimizer: name.to_string(),
                runs: vals.len() + diverged,
                diverged: *diverged,
                mean: stats::mean(vals),
                std: stats::std_dev(vals),
                steps_per_second: None,
            }
        })
        .collect()
}

pub(crate) fn comment_block(out: &mut String, text: &str) {
    for line in text.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render one run as a curve file: the config as `#` lines, a run line, then
/// one row per completed step.
pub fn curve_csv(config_text: &str, label: &str, seed_index: usize, rec: &RunRecord) -> String {
    let mut out = String::with_capacity(rec.losses.len() * 24 + config_text.len());
    comment_block(&mut out, config_text);
    let diverged = rec.diverged_at.map(|d| d.to_string()).unwrap_or_else(|| "none".into());
    let _ = writeln!(out, "# run: optimizer={label} seed_index={seed_index} seed={} diverged_at={diverged}", rec.seed);
    out.push_str(CURVE_HEADER);
    out.push('\n');
    let mut sigma = rec.sigma.iter().peekable();
    for (i, loss) in rec.losses.iter().enumerate() {
        let s = match sigma.peek() {
            Some(&&(step, v)) if step == i => {
                sigma.next();
                Some(v)
            }
            _ => None,
        };
        let _ = writeln!(out, "{i},{loss},{},{}", opt_cell(s), opt_cell(rec.step_ms.get(i).copied()));
    }
    out
}

pub fn summary_csv(config_text: &str, rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    comment_block(&mut out, config_text);
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.optimizer, r.runs, r.diverged, r.mean, r.std);
    }
    out
}

/// A curve file parsed back into its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub optimizer: String,
    pub seed_index: usize,
    pub diverged: bool,
    pub losses: Vec<f64>,
    pub sigma: Vec<(usize, f64)>,
}

pub fn parse_curve(text: &str) -> Result<Curve> {
    let bad = |line: usize, msg: &str| BenchError::Parse { line, msg: msg.to_string() };
    let mut meta: Option<(String, usize, bool)> = None;
    let mut header_seen = false;
    let mut losses = Vec::new();
    let mut sigma = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(c) = raw.strip_prefix('#') {
            if let Some(run) = c.trim().strip_prefix("run:") {
                let mut fields = BTreeMap::new();
                for kv in run.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad(line, "malformed run line"))?;
                    fields.insert(k, v);
                }
                let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(line, "incomplete run line"));
                meta = Some((
                    get("optimizer")?.to_string(),
                    get("seed_index")?.parse().map_err(|_| bad(line, "bad seed_index"))?,
                    get("diverged_at")? != "none",
                ));
            }
            continue;
        }
        if !header_seen {
            if raw != CURVE_HEADER {
                return Err(bad(line, "unexpected curve header"));
            }
            header_seen = true;
            continue;
        }
        let cells: Vec<&str> = raw.split(',').collect();
        if cells.len() != 4 {
            return Err(bad(line, "expected 4 columns"));
        }
        let step: usize = cells[0].parse().map_err(|_| bad(line, "bad step"))?;
        if step != losses.len() {
            return Err(bad(line, "steps out of order"));
        }
        losses.push(cells[1].parse().map_err(|_| bad(line, "bad loss"))?);
        if !cells[2].is_empty() {
            sigma.push((step, cells[2].parse().map_err(|_| bad(line, "bad sigma"))?));
        }
    }
    let (optimizer, seed_index, diverged) = meta.ok_or_else(|| bad(0, "curve file has no run line"))?;
    Ok(Curve { optimizer, seed_index, diverged, losses, sigma })
}

/// Rebuild the summary table from the curve files in `dir`.
pub fn summarize_curves(dir: &Path, window: &Window) -> Result<Vec<SummaryRow>> {
    let curves_dir = dir.join("curves");
    let mut names: Vec<_> = std::fs::read_dir(&curves_dir)
        .map_err(io_err(&curves_dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()
        .map_err(io_err(&curves_dir))?;
    names.retain(|p| p.extension().is_some_and(|e| e == "csv"));
    let mut curves = names
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(io_err(p))?;
            parse_curve(&text)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary_csv = dir.join("summary.csv");
    let order: Vec<String> = std::fs::read_to_string(&summary_csv)
        .map_err(io_err(&summary_csv))?
        .lines()
        .filter(|l| !l.starts_with('#') && *l != SUMMARY_HEADER)
        .filter_map(|l| l.split(',').next().map(str::to_string))
        .collect();
    let rank = |name: &str| order.iter().position(|o| o == name).unwrap_or(usize::MAX);
    curves.sort_by(|a, b| rank(&a.optimizer).cmp(&rank(&b.optimizer)).then(a.seed_index.cmp(&b.seed_index)));
    Ok(summarize(
        curves
            .iter()
            .map(|c| (c.optimizer.as_str(), run_value(&c.losses, c.diverged, window))),
    ))
}
