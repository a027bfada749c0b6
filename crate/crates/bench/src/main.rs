use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lodo_bench::config::{self, ExperimentConfig, NamedOptimizer, SweepSettings, TuneSettings, SEED_ENV};
use lodo_bench::error::{BenchError, Result};
use lodo_bench::{momentum_sweep, suite, sweep};
use lodo_core::optimizers::{BaselineConfig, BaselineKind, LodoConfig, OptimizerSpec};
use lodo_core::tasks::{BowlConfig, TaskSpec};
use lodo_core::theory::{
    estimate_entropy_curve, reachability_fraction, simulate_dense_dynamics, simulate_simplified_lodo, DynamicsSetup,
};
use lodo_core::tuner::{tune, OptimizerFamily};

#[derive(Parser)]
#[command(name = "lodo", version, about = "Benchmarks and numerical checks for the LODO optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimizer × seed suite and write curves plus a summary.
    Bench(BenchArgs),
    /// Numerical checks of the learning dynamics and block-network expressiveness.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Genetic hyperparameter search; writes the lineage as JSON.
    Tune(TuneArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Bowl,
    Rosenbrock,
    Ablations,
    Sweep,
}

#[derive(Args)]
struct Common {
    /// Master seed (overrides the config file).
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in suite; omit when passing --config.
    suite: Option<Suite>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Iterate the dense-preconditioner recurrence; CSV of t,frob_a,frob_bdinv,loss.
    Dynamics(DynamicsArgs),
    /// Permutation-entropy deficit and reachability of random block networks.
    Entropy(EntropyArgs),
}

#[derive(Args)]
struct DynamicsArgs {
    #[arg(long, default_value_t = 5)]
    dim: usize,
    #[arg(long, default_value_t = 1e-4)]
    alpha: f64,
    #[arg(long, default_value_t = 50_000)]
    steps: usize,
    #[arg(long, default_value_t = 0.5)]
    eig_min: f64,
    #[arg(long, default_value_t = 1.0)]
    eig_max: f64,
    /// Initial error operator is this multiple of the identity.
    #[arg(long, default_value_t = 0.5)]
    a0: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Also run the optimizer directly and report the largest deviation.
    #[arg(long)]
    check: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long, default_value_t = 4)]
    n_tilde: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    blocks: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Block count for the reachability check.
    #[arg(long, default_value_t = 20)]
    reach_blocks: usize,
    #[arg(long, default_value_t = 100)]
    reach_seeds: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    /// Config with a [tune] section.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Optimizer family to tune when no config is given.
    #[arg(long, default_value = "adam")]
    family: String,
    #[arg(long, value_enum, default_value = "bowl")]
    task: TaskKind,
    #[arg(long)]
    population: Option<usize>,
    /// `bowl`, `rosenbrock`, or a list like `3:1000, 2:2000`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskKind {
    Bowl,
    Rosenbrock,
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.into(), source })?;
    ExperimentConfig::parse(&text)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| BenchError::Io { path: p.into(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| BenchError::Io { path: "<stdout>".into(), source }),
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut cfg = match (&args.config, args.suite) {
        (Some(p), None) => read_config(p)?,
        (None, Some(Suite::Bowl)) => ExperimentConfig::bowl_preset(),
        (None, Some(Suite::Rosenbrock)) => ExperimentConfig::rosenbrock_preset(),
        (None, Some(Suite::Ablations)) => ExperimentConfig::ablation_preset(),
        (None, Some(Suite::Sweep)) => {
            let mut c = ExperimentConfig::bowl_preset();
            c.name = "momentum_sweep".into();
            c.optimizers.truncate(1);
            c.sigma_every = None;
            c.sweep = Some(SweepSettings {
                betas: config::momentum_grid(config::MOMENTUM_SWEEP_MAX, 8)?,
            });
            c
        }
        (Some(_), Some(_)) => return Err(BenchError::Config("give either a suite or --config, not both".into())),
        (None, None) => return Err(BenchError::Config("name a suite or pass --config".into())),
    };
    if let Some(s) = args.common.seed {
        cfg.master_seed = s;
    }
    if let Some(s) = args.common.steps {
        cfg.steps = s;
    }
    if let Some(s) = args.common.seeds {
        cfg.seeds = s;
    }
    cfg.validate()?;
    let dir = suite::output_dir(&cfg, &args.out);
    if cfg.sweep.is_some() {
        let points = momentum_sweep(&cfg)?;
        sweep::write_sweep(&cfg, &points, &dir)?;
        println!("{:>10}  {:>5}  {:>8}  {:>12}", "beta", "runs", "diverged", "loss");
        for p in &points {
            println!("{:>10.6}  {:>5}  {:>8}  {:>12.5}", p.beta, p.runs, p.diverged, p.loss);
        }
        return Ok(());
    }
    let rows = suite::run_suite(&cfg, &dir)?;
    println!("{:<14}  {:>4}  {:>8}  {:>12}  {:>10}  {:>10}", "optimizer", "runs", "diverged", "mean", "std", "steps/s");
    for r in &rows {
        let rate = r.steps_per_second.map(|x| format!("{x:.0}")).unwrap_or_default();
        println!(
            "{:<14}  {:>4}  {:>8}  {:>12.5}  {:>10.5}  {:>10}",
            r.optimizer, r.runs, r.diverged, r.mean, r.std, rate
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn dynamics(a: DynamicsArgs) -> Result<()> {
    let setup = DynamicsSetup::rotated(a.dim, a.eig_min, a.eig_max, a.a0, a.alpha, a.steps, a.seed);
    let trace = simulate_dense_dynamics(&setup)?;
    let mut csv = String::from("t,frob_a,frob_bdinv,loss\n");
    for r in &trace.rows {
        csv.push_str(&format!("{},{},{},{}\n", r.t, r.frob_a, r.frob_bdinv, r.loss));
    }
    emit(a.out.as_deref(), &csv)?;
    if a.check {
        let direct = simulate_simplified_lodo(&setup)?;
        eprintln!("max |recurrence − optimizer| = {:e}", trace.max_abs_diff(&direct));
    }
    Ok(())
}

fn entropy(a: EntropyArgs) -> Result<()> {
    let curve = estimate_entropy_curve(a.n_tilde, &a.blocks, a.trials, a.seed)?;
    let mut csv = String::from("n_tilde,blocks,trials,epsilon_hat,std_err\n");
    for e in &curve {
        csv.push_str(&format!("{},{},{},{},{}\n", e.n_tilde, e.m, e.trials, e.epsilon_hat, e.std_err));
    }
    emit(a.out.as_deref(), &csv)?;
    let reach = reachability_fraction(a.n_tilde, a.reach_blocks, a.reach_seeds, a.seed)?;
    eprintln!(
        "reachability over {} seeds with {} blocks: {reach}",
        a.reach_seeds, a.reach_blocks
    );
    Ok(())
}

fn tune_cmd(a: TuneArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => read_config(p)?,
        None => {
            let task = match a.task {
                TaskKind::Bowl => TaskSpec::Bowl(BowlConfig::default()),
                TaskKind::Rosenbrock => TaskSpec::Rosenbrock,
            };
            let spec = if a.family == "lodo" {
                OptimizerSpec::Lodo(LodoConfig::default())
            } else {
                OptimizerSpec::Baseline(BaselineConfig::defaults(a.family.parse::<BaselineKind>()?))
            };
            let mut c = ExperimentConfig::empty("tune", task, 1);
            c.optimizers.push(NamedOptimizer { label: a.family.clone(), spec });
            c.tune = Some(TuneSettings {
                optimizer: a.family.clone(),
                population: 32,
                schedule: match a.task {
                    TaskKind::Bowl => lodo_core::tuner::Schedule::bowl(),
                    TaskKind::Rosenbrock => lodo_core::tuner::Schedule::rosenbrock(),
                },
            });
            c
        }
    };
    let mut settings = cfg
        .tune
        .clone()
        .ok_or_else(|| BenchError::Config("config has no [tune] section".into()))?;
    if let Some(p) = a.population {
        settings.population = p;
    }
    if let Some(s) = &a.schedule {
        settings.schedule = config::parse_schedule(s, 0)?;
    }
    let spec = cfg
        .optimizers
        .iter()
        .find(|o| o.label == settings.optimizer)
        .map(|o| o.spec.clone())
        .ok_or_else(|| BenchError::Config(format!("unknown optimizer '{}'", settings.optimizer)))?;
    let family = OptimizerFamily::new(spec, cfg.task.clone());
    let result = tune(&family, &settings.schedule, settings.population, a.seed)?;
    for (name, v) in result.names.iter().zip(&result.best) {
        eprintln!("{name} = {v}");
    }
    let mut json = serde_json::to_string_pretty(&result)?;
    json.push('\n');
    emit(a.out.as_deref(), &json)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Bench(a) => bench(a),
        Command::Theory(TheoryCommand::Dynamics(a)) => dynamics(a),
        Command::Theory(TheoryCommand::Entropy(a)) => entropy(a),
        Command::Tune(a) => tune_cmd(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
