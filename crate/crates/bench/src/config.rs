//! Plain-text experiment configs.
//!
//! ```text
//! # comments start with '#'
//! [experiment]
//! steps = 100000
//! seeds = 8
//!
//! [task]
//! kind = bowl
//!
//! [optimizer lodo]
//! family = lodo
//! preset = bowl
//! meta_lr = 0.001
//! ```
//!
//! Sections may repeat only for `optimizer`, which takes a label.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use lodo_core::gmat::Variant;
use lodo_core::optimizers::{BaselineConfig, BaselineKind, LodoConfig, MetaKind, OptimizerSpec};
use lodo_core::stats::Window;
use lodo_core::tasks::{BowlConfig, TaskSpec};
use lodo_core::tuner::Schedule;

use crate::error::{BenchError, Result};

/// Environment variable the CLI reads as the master seed.
pub const SEED_ENV: &str = "LODO_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub label: Option<String>,
    pub line: usize,
    pub entries: Vec<(String, String, usize)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.iter().find(|(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l))
    }
}

/// Split a config file into sections, keeping order and line numbers.
pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(inner) = s.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| BenchError::Parse { line, msg: format!("unterminated section header '{s}'") })?
                .trim();
            let mut parts = inner.split_whitespace();
            let name = parts.next().unwrap_or("").to_string();
            let label = parts.next().map(str::to_string);
            if name.is_empty() || parts.next().is_some() {
                return Err(BenchError::Parse { line, msg: format!("bad section header '{s}'") });
            }
            out.push(Section { name, label, line, entries: Vec::new() });
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| BenchError::Parse { line, msg: format!("expected key = value, got '{s}'") })?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() {
            return Err(BenchError::Parse { line, msg: "empty key".into() });
        }
        let sec = out
            .last_mut()
            .ok_or_else(|| BenchError::Parse { line, msg: "key outside any section".into() })?;
        if sec.get(&k).is_some() {
            return Err(BenchError::Parse { line, msg: format!("duplicate key '{k}'") });
        }
        sec.entries.push((k, v, line));
    }
    Ok(out)
}

fn value<T: FromStr>(sec: &Section, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match sec.get(key) {
        None => Ok(None),
        Some((v, line)) => v
            .parse()
            .map(Some)
            .map_err(|e| BenchError::Parse { line, msg: format!("{key}: {e}") }),
    }
}

fn check_keys(sec: &Section, allowed: &[&str]) -> Result<()> {
    for (k, _, line) in &sec.entries {
        if !allowed.contains(&k.as_str()) {
            return Err(BenchError::Parse {
                line: *line,
                msg: format!("unknown key '{k}' in [{}]", sec.name),
            });
        }
    }
    Ok(())
}

/// One optimizer in an experiment, with the label used in output files.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NamedOptimizer {
    pub label: String,
    pub spec: OptimizerSpec,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TuneSettings {
    /// Label of the optimizer to tune.
    pub optimizer: String,
    pub population: usize,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepSettings {
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub task: TaskSpec,
    pub optimizers: Vec<NamedOptimizer>,
    pub steps: usize,
    pub seeds: usize,
    pub master_seed: u64,
    /// σ̂ cadence in steps; `None` disables the diagnostic.
    pub sigma_every: Option<usize>,
    pub sigma_probes: usize,
    pub wall_clock: bool,
    /// Part of each loss trace that the summary averages.
    pub window: Window,
    pub smooth_block: usize,
    pub output: Option<PathBuf>,
    pub tune: Option<TuneSettings>,
    pub sweep: Option<SweepSettings>,
}

pub const MOMENTUM_SWEEP_MAX: f64 = 0.9343;

/// `points` decays, log-spaced in `1 − β` from `β = 0` up to `beta_max`.
pub fn momentum_grid(beta_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&beta_max) || beta_max == 0.0 {
        return Err(BenchError::Config(format!("beta_max must lie in (0, 1), got {beta_max}")));
    }
    if points < 2 {
        return Err(BenchError::Config("a sweep needs at least 2 points".into()));
    }
    let top = (1.0 - beta_max).ln();
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                beta_max
            } else {
                1.0 - (top * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

fn parse_window(s: &str, line: usize) -> Result<Window> {
    let bad = || BenchError::Parse { line, msg: format!("window must be 'last:<fraction>' or 'range:<start>:<end>', got '{s}'") };
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        ["last", f] => Ok(Window::LastFraction { fraction: f.parse().map_err(|_| bad())? }),
        ["range", a, b] => Ok(Window::Range {
            start: a.parse().map_err(|_| bad())?,
            end: b.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn render_window(w: &Window) -> String {
    match *w {
        Window::LastFraction { fraction } => format!("last:{fraction}"),
        Window::Range { start, end } => format!("range:{start}:{end}"),
    }
}

pub fn parse_schedule(s: &str, line: usize) -> Result<Schedule> {
    match s {
        "bowl" => return Ok(Schedule::bowl()),
        "rosenbrock" => return Ok(Schedule::rosenbrock()),
        "image" => return Ok(Schedule::image()),
        _ => {}
    }
    let bad = |msg: String| BenchError::Parse { line, msg };
    let pairs = s
        .split(',')
        .map(|p| {
            let (noise, steps) = p
                .trim()
                .split_once(':')
                .ok_or_else(|| bad(format!("schedule entries look like noise:steps, got '{p}'")))?;
            let noise: f64 = noise.trim().parse().map_err(|_| bad(format!("bad noise '{noise}'")))?;
            let steps: usize = steps.trim().parse().map_err(|_| bad(format!("bad step count '{steps}'")))?;
            Ok((noise, steps))
        })
        .collect::<Result<Vec<_>>>()?;
    Schedule::from_pairs(&pairs).map_err(|e| bad(e.to_string()))
}

fn render_schedule(s: &Schedule) -> String {
    s.generations
        .iter()
        .map(|g| format!("{}:{}", g.noise_stddev, g.steps))
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_task(sec: &Section) -> Result<TaskSpec> {
    check_keys(sec, &["kind", "dim", "eig_min", "eig_max", "hessian_seed"])?;
    let kind: String = value(sec, "kind")?.unwrap_or_else(|| "bowl".into());
    match kind.as_str() {
        "bowl" => {
            let d = BowlConfig::default();
            Ok(TaskSpec::Bowl(BowlConfig {
                dim: value(sec, "dim")?.unwrap_or(d.dim),
                eig_min: value(sec, "eig_min")?.unwrap_or(d.eig_min),
                eig_max: value(sec, "eig_max")?.unwrap_or(d.eig_max),
                hessian_seed: value(sec, "hessian_seed")?.unwrap_or(d.hessian_seed),
                noise_variance: None,
            }))
        }
        "rosenbrock" => {
            if sec.entries.len() > 1 {
                return Err(BenchError::Config("the rosenbrock task takes no parameters".into()));
            }
            Ok(TaskSpec::Rosenbrock)
        }
        other => Err(BenchError::Config(format!("unknown task kind '{other}'"))),
    }
}

fn parse_optimizer(sec: &Section) -> Result<NamedOptimizer> {
    let label = sec.label.clone().ok_or_else(|| BenchError::Parse {
        line: sec.line,
        msg: "optimizer sections need a label, e.g. [optimizer adam]".into(),
    })?;
    if !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(BenchError::Parse { line: sec.line, msg: format!("label '{label}' may only use letters, digits, '-' and '_'") });
    }
    let family: String = value(sec, "family")?.ok_or_else(|| BenchError::Parse { line: sec.line, msg: "missing 'family'".into() })?;
    let preset: String = value(sec, "preset")?.unwrap_or_else(|| "defaults".into());
    let spec = if family == "lodo" {
        check_keys(sec, &["family", "preset", "variant", "meta_lr", "beta", "alpha0", "block_size", "depth", "meta"])?;
        let variant: Variant = match value::<String>(sec, "variant")? {
            Some(v) => v.parse()?,
            None => Variant::Full,
        };
        let base = match preset.as_str() {
            "defaults" => LodoConfig { variant, ..LodoConfig::default() },
            "bowl" => LodoConfig::bowl(variant),
            "rosenbrock" => LodoConfig { variant, ..LodoConfig::rosenbrock() },
            other => return Err(BenchError::Config(format!("unknown preset '{other}'"))),
        };
        let meta = match value::<String>(sec, "meta")?.as_deref() {
            None => base.meta,
            Some("adam") => MetaKind::Adam,
            Some("sgd") => MetaKind::Sgd,
            Some(other) => return Err(BenchError::Config(format!("unknown meta optimizer '{other}'"))),
        };
        OptimizerSpec::Lodo(LodoConfig {
            meta_lr: value(sec, "meta_lr")?.unwrap_or(base.meta_lr),
            beta: value(sec, "beta")?.unwrap_or(base.beta),
            alpha0: value(sec, "alpha0")?.unwrap_or(base.alpha0),
            block_size: value(sec, "block_size")?.unwrap_or(base.block_size),
            depth: value(sec, "depth")?.unwrap_or(base.depth),
            meta,
            ..base
        })
    } else {
        let kind: BaselineKind = family.parse()?;
        check_keys(sec, &["family", "preset", "lr", "beta", "beta1", "beta2", "rho", "eps"])?;
        let base = match preset.as_str() {
            "defaults" => BaselineConfig::defaults(kind),
            "bowl" => BaselineConfig::bowl(kind),
            "rosenbrock" => BaselineConfig::rosenbrock(kind),
            other => return Err(BenchError::Config(format!("unknown preset '{other}'"))),
        };
        let allowed: &[&str] = match kind {
            BaselineKind::Adam | BaselineKind::Yogi => &["lr", "beta1", "beta2", "eps"],
            BaselineKind::Momentum => &["lr", "beta"],
            BaselineKind::RmsProp => &["lr", "rho", "beta", "eps"],
        };
        for (k, _, line) in &sec.entries {
            if !["family", "preset"].contains(&k.as_str()) && !allowed.contains(&k.as_str()) {
                return Err(BenchError::Parse { line: *line, msg: format!("'{k}' does not apply to {family}") });
            }
        }
        let f = |key: &str, cur: f64| -> Result<f64> { Ok(value(sec, key)?.unwrap_or(cur)) };
        OptimizerSpec::Baseline(match base {
            BaselineConfig::Adam { lr, beta1, beta2, eps } => BaselineConfig::Adam {
                lr: f("lr", lr)?,
                beta1: f("beta1", beta1)?,
                beta2: f("beta2", beta2)?,
                eps: f("eps", eps)?,
            },
            BaselineConfig::Yogi { lr, beta1, beta2, eps } => BaselineConfig::Yogi {
                lr: f("lr", lr)?,
                beta1: f("beta1", beta1)?,
                beta2: f("beta2", beta2)?,
                eps: f("eps", eps)?,
            },
            BaselineConfig::Momentum { lr, beta } => BaselineConfig::Momentum {
                lr: f("lr", lr)?,
                beta: f("beta", beta)?,
            },
            BaselineConfig::RmsProp { lr, rho, beta, eps } => BaselineConfig::RmsProp {
                lr: f("lr", lr)?,
                rho: f("rho", rho)?,
                beta: f("beta", beta)?,
                eps: f("eps", eps)?,
            },
        })
    };
    Ok(NamedOptimizer { label, spec })
}

impl ExperimentConfig {
    /// A config with no optimizers; callers fill them in.
    pub fn empty(name: &str, task: TaskSpec, steps: usize) -> Self {
        Self {
            name: name.to_string(),
            task,
            optimizers: Vec::new(),
            steps,
            seeds: 8,
            master_seed: 0,
            sigma_every: Some(1000),
            sigma_probes: 100,
            wall_clock: false,
            window: Window::default(),
            smooth_block: 200,
            output: None,
            tune: None,
            sweep: None,
        }
    }

    /// LODO against the four baselines on the noisy bowl, tuned settings.
    pub fn bowl_preset() -> Self {
        let mut cfg = Self::empty("bowl", TaskSpec::Bowl(BowlConfig::default()), 100_000);
        cfg.optimizers.push(NamedOptimizer {
            label: "lodo".into(),
            spec: OptimizerSpec::Lodo(LodoConfig::bowl(Variant::Full)),
        });
        for k in BaselineKind::ALL {
            cfg.optimizers.push(NamedOptimizer {
                label: k.name().into(),
                spec: OptimizerSpec::Baseline(BaselineConfig::bowl(k)),
            });
        }
        cfg
    }

    /// The LODO ablations on the noisy bowl.
    pub fn ablation_preset() -> Self {
        let mut cfg = Self::empty("ablations", TaskSpec::Bowl(BowlConfig::default()), 100_000);
        for v in [Variant::Full, Variant::Diagonal, Variant::Global, Variant::Residual] {
            let spec = LodoConfig::bowl(v);
            cfg.optimizers.push(NamedOptimizer {
                label: spec.label(),
                spec: OptimizerSpec::Lodo(spec),
            });
        }
        cfg
    }

    pub fn rosenbrock_preset() -> Self {
        let mut cfg = Self::empty("rosenbrock", TaskSpec::Rosenbrock, 200);
        cfg.sigma_every = None;
        cfg.window = Window::Range { start: 180, end: 200 };
        cfg.smooth_block = 1;
        cfg.optimizers.push(NamedOptimizer {
            label: "lodo".into(),
            spec: OptimizerSpec::Lodo(LodoConfig::rosenbrock()),
        });
        for k in BaselineKind::ALL {
            cfg.optimizers.push(NamedOptimizer {
                label: k.name().into(),
                spec: OptimizerSpec::Baseline(BaselineConfig::rosenbrock(k)),
            });
        }
        cfg
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let mut task = None;
        let mut exp: Option<&Section> = None;
        let mut tune_sec: Option<&Section> = None;
        let mut sweep_sec: Option<&Section> = None;
        let mut optimizers = Vec::new();
        for sec in &sections {
            let slot = match sec.name.as_str() {
                "optimizer" => {
                    optimizers.push(parse_optimizer(sec)?);
                    continue;
                }
                "task" => {
                    if task.is_some() {
                        return Err(BenchError::Parse { line: sec.line, msg: "duplicate [task]".into() });
                    }
                    task = Some(parse_task(sec)?);
                    continue;
                }
                "experiment" => &mut exp,
                "tune" => &mut tune_sec,
                "sweep" => &mut sweep_sec,
                other => return Err(BenchError::Parse { line: sec.line, msg: format!("unknown section [{other}]") }),
            };
            if slot.replace(sec).is_some() {
                return Err(BenchError::Parse { line: sec.line, msg: format!("duplicate [{}]", sec.name) });
            }
            if sec.label.is_some() {
                return Err(BenchError::Parse { line: sec.line, msg: format!("[{}] takes no label", sec.name) });
            }
        }
        let task = task.ok_or_else(|| BenchError::Config("missing [task] section".into()))?;
        let mut cfg = Self::empty("experiment", task, 1000);
        if matches!(cfg.task, TaskSpec::Rosenbrock) {
            cfg.sigma_every = None;
        }
        cfg.optimizers = optimizers;
        if let Some(sec) = exp {
            check_keys(
                sec,
                &["name", "steps", "seeds", "master_seed", "sigma_every", "sigma_probes", "wall_clock", "window", "smooth_block", "output"],
            )?;
            if let Some(v) = value(sec, "name")? {
                cfg.name = v;
            }
            cfg.steps = value(sec, "steps")?.unwrap_or(cfg.steps);
            cfg.seeds = value(sec, "seeds")?.unwrap_or(cfg.seeds);
            cfg.master_seed = value(sec, "master_seed")?.unwrap_or(cfg.master_seed);
            if let Some(every) = value::<usize>(sec, "sigma_every")? {
                cfg.sigma_every = (every > 0).then_some(every);
            }
            cfg.sigma_probes = value(sec, "sigma_probes")?.unwrap_or(cfg.sigma_probes);
            cfg.wall_clock = value(sec, "wall_clock")?.unwrap_or(cfg.wall_clock);
            if let Some((w, line)) = sec.get("window") {
                cfg.window = parse_window(w, line)?;
            }
            cfg.smooth_block = value(sec, "smooth_block")?.unwrap_or(cfg.smooth_block);
            cfg.output = value::<String>(sec, "output")?.map(PathBuf::from);
        }
        if let Some(sec) = tune_sec {
            check_keys(sec, &["optimizer", "population", "schedule"])?;
            let optimizer = match value::<String>(sec, "optimizer")? {
                Some(o) => o,
                None if cfg.optimizers.len() == 1 => cfg.optimizers[0].label.clone(),
                None => return Err(BenchError::Parse { line: sec.line, msg: "[tune] needs 'optimizer' when several are declared".into() }),
            };
            let schedule = match sec.get("schedule") {
                Some((s, line)) => parse_schedule(s, line)?,
                None => match cfg.task {
                    TaskSpec::Rosenbrock => Schedule::rosenbrock(),
                    TaskSpec::Bowl(_) => Schedule::bowl(),
                },
            };
            cfg.tune = Some(TuneSettings {
                optimizer,
                population: value(sec, "population")?.unwrap_or(32),
                schedule,
            });
        }
        if let Some(sec) = sweep_sec {
            check_keys(sec, &["betas", "beta_max", "points"])?;
            let betas = match sec.get("betas") {
                Some((list, line)) => list
                    .split(',')
                    .map(|b| {
                        b.trim()
                            .parse::<f64>()
                            .map_err(|e| BenchError::Parse { line, msg: format!("betas: {e}") })
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => momentum_grid(
                    value(sec, "beta_max")?.unwrap_or(MOMENTUM_SWEEP_MAX),
                    value(sec, "points")?.unwrap_or(8),
                )?,
            };
            cfg.sweep = Some(SweepSettings { betas });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.optimizers.is_empty() && self.sweep.is_none() {
            return Err(BenchError::Config("no optimizers declared".into()));
        }
        if self.steps == 0 || self.seeds == 0 {
            return Err(BenchError::Config("steps and seeds must both be at least 1".into()));
        }
        if self.sigma_probes == 0 {
            return Err(BenchError::Config("sigma_probes must be at least 1".into()));
        }
        if self.smooth_block == 0 {
            return Err(BenchError::Config("smooth_block must be at least 1".into()));
        }
        match self.window {
            Window::LastFraction { fraction } if !(fraction > 0.0 && fraction <= 1.0) => {
                return Err(BenchError::Config(format!("window fraction must lie in (0, 1], got {fraction}")))
            }
            Window::Range { start, end } if start >= end || end > self.steps => {
                return Err(BenchError::Config(format!("window range {start}..{end} does not fit {} steps", self.steps)))
            }
            _ => {}
        }
        let mut seen = BTreeSet::new();
        for o in &self.optimizers {
            if !seen.insert(o.label.as_str()) {
                return Err(BenchError::Config(format!("duplicate optimizer label '{}'", o.label)));
            }
            o.spec.validate()?;
            if let OptimizerSpec::Lodo(l) = &o.spec {
                if l.variant == Variant::Dense {
                    return Err(BenchError::Config("the dense variant is only available in the theory commands".into()));
                }
            }
        }
        if let Some(t) = &self.tune {
            if !seen.contains(t.optimizer.as_str()) {
                return Err(BenchError::Config(format!("[tune] refers to unknown optimizer '{}'", t.optimizer)));
            }
            if t.population < 2 {
                return Err(BenchError::Config("tune population must be at least 2".into()));
            }
        }
        if let Some(s) = &self.sweep {
            if s.betas.is_empty() {
                return Err(BenchError::Config("sweep has no momentum values".into()));
            }
            let mut sorted = s.betas.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(BenchError::Config("duplicate momentum values in sweep".into()));
            }
            if let Some(b) = s.betas.iter().find(|b| !(0.0..1.0).contains(*b)) {
                return Err(BenchError::Config(format!("momentum {b} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "seeds = {}", self.seeds);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "sigma_every = {}", self.sigma_every.unwrap_or(0));
        let _ = writeln!(s, "sigma_probes = {}", self.sigma_probes);
        let _ = writeln!(s, "wall_clock = {}", self.wall_clock);
        let _ = writeln!(s, "window = {}", render_window(&self.window));
        let _ = writeln!(s, "smooth_block = {}", self.smooth_block);
        if let Some(o) = &self.output {
            let _ = writeln!(s, "output = {}", o.display());
        }
        let _ = writeln!(s, "\n[task]");
        match &self.task {
            TaskSpec::Bowl(b) => {
                let _ = writeln!(s, "kind = bowl");
                let _ = writeln!(s, "dim = {}", b.dim);
                let _ = writeln!(s, "eig_min = {}", b.eig_min);
                let _ = writeln!(s, "eig_max = {}", b.eig_max);
                let _ = writeln!(s, "hessian_seed = {}", b.hessian_seed);
            }
            TaskSpec::Rosenbrock => {
                let _ = writeln!(s, "kind = rosenbrock");
            }
        }
        for o in &self.optimizers {
            let _ = writeln!(s, "\n[optimizer {}]", o.label);
            match &o.spec {
                OptimizerSpec::Lodo(l) => {
                    let _ = writeln!(s, "family = lodo");
                    let _ = writeln!(s, "variant = {}", l.variant.name());
                    let _ = writeln!(s, "meta_lr = {}", l.meta_lr);
                    let _ = writeln!(s, "beta = {}", l.beta);
                    let _ = writeln!(s, "alpha0 = {}", l.alpha0);
                    let _ = writeln!(s, "block_size = {}", l.block_size);
                    let _ = writeln!(s, "depth = {}", l.depth);
                    let meta = match l.meta {
                        MetaKind::Adam => "adam",
                        MetaKind::Sgd => "sgd",
                    };
                    let _ = writeln!(s, "meta = {meta}");
                }
                OptimizerSpec::Baseline(b) => {
                    let _ = writeln!(s, "family = {}", b.kind().name());
                    match *b {
                        BaselineConfig::Adam { lr, beta1, beta2, eps } | BaselineConfig::Yogi { lr, beta1, beta2, eps } => {
                            let _ = write!(s, "lr = {lr}\nbeta1 = {beta1}\nbeta2 = {beta2}\neps = {eps}\n");
                        }
                        BaselineConfig::Momentum { lr, beta } => {
                            let _ = write!(s, "lr = {lr}\nbeta = {beta}\n");
                        }
                        BaselineConfig::RmsProp { lr, rho, beta, eps } => {
                            let _ = write!(s, "lr = {lr}\nrho = {rho}\nbeta = {beta}\neps = {eps}\n");
                        }
                    }
                }
            }
        }
        if let Some(t) = &self.tune {
            let _ = writeln!(s, "\n[tune]");
            let _ = writeln!(s, "optimizer = {}", t.optimizer);
            let _ = writeln!(s, "population = {}", t.population);
            let _ = writeln!(s, "schedule = {}", render_schedule(&t.schedule));
        }
        if let Some(sw) = &self.sweep {
            let betas: Vec<String> = sw.betas.iter().map(|b| b.to_string()).collect();
            let _ = writeln!(s, "\n[sweep]");
            let _ = writeln!(s, "betas = {}", betas.join(", "));
        }
        s
    }
}
