//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Failures are reported but do not change the exit status unless
//! `LODO_ACCEPTANCE_STRICT` is set, so the rest of the workspace's tests still
//! run under `cargo test`.

use std::time::Instant;

use rand::Rng;

use lodo_bench::config::ExperimentConfig;
use lodo_bench::suite::{run_grid, GridRun};
use lodo_bench::{run_suite, NamedOptimizer};
use lodo_core::gmat::{GNetConfig, Preconditioner, Variant};
use lodo_core::linalg::{dot, norm_inf, normal_vec};
use lodo_core::optimizers::{BaselineConfig, BaselineKind, LodoConfig, OptimizerSpec};
use lodo_core::rng::{derive_seed, rng_from_seed};
use lodo_core::stats::mean;
use lodo_core::tasks::{BowlConfig, NoisyQuadraticBowl, TaskSpec};
use lodo_core::theory::{
    estimate_entropy_curve, reachable_fraction_for_seed, simulate_dense_dynamics, simulate_simplified_lodo,
    DynamicsSetup,
};
use lodo_core::tuner::{tune, Family, OptimizerFamily, Schedule};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn identity_init() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = rng_from_seed(1);
    for variant in [Variant::Full, Variant::Diagonal, Variant::Global, Variant::Residual] {
        for (n, seed) in [(100, 0), (37, 1), (8, 2)] {
            let alpha0 = 0.27;
            let cfg = GNetConfig::new(n).alpha0(alpha0).seed(seed);
            let p = Preconditioner::build(variant, &cfg).unwrap();
            for _ in 0..100 {
                let v = normal_vec(n, &mut rng);
                let gv = p.apply(&v).unwrap();
                let err = gv.iter().zip(&v).map(|(a, b)| (a - alpha0 * b).abs()).fold(0.0, f64::max);
                worst = worst.max(err / (alpha0 * norm_inf(&v)));
            }
        }
    }
    outcome(worst <= 1e-9, format!("worst relative deviation {worst:.2e}"))
}

fn scrambled(n: usize, depth: usize, seed: u64) -> Preconditioner {
    let cfg = GNetConfig::new(n).block_size(2).depth(depth).alpha0(0.7).seed(seed);
    let mut p = Preconditioner::build(Variant::Full, &cfg).unwrap();
    let mut rng = rng_from_seed(derive_seed(seed, &[7]));
    for t in p.params_mut() {
        *t += rng.random_range(-0.4..0.4);
    }
    p
}

fn hypergradient_fd() -> Outcome {
    let loss = |p: &Preconditioner, m: &[f64], g: &[f64]| -dot(g, &p.apply(m).unwrap());
    let mut rng = rng_from_seed(2);
    let mut worst: f64 = 0.0;
    for inst in 0..100u64 {
        let n = rng.random_range(2..=8);
        let depth = rng.random_range(1..=4);
        let p = scrambled(n, depth, inst);
        let m = normal_vec(n, &mut rng);
        let g = normal_vec(n, &mut rng);
        let analytic = p.hypergrad(&m, &g).unwrap().0;
        // exact for a loss that is quadratic in each parameter, up to rounding
        let h = 1e-4;
        let floor = 1e-4 * norm_inf(&analytic).max(1e-12);
        for (j, a) in analytic.iter().enumerate() {
            let mut q = p.clone();
            q.params_mut()[j] += h;
            let up = loss(&q, &m, &g);
            q.params_mut()[j] -= 2.0 * h;
            let fd = (up - loss(&q, &m, &g)) / (2.0 * h);
            worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(floor));
        }
    }
    outcome(worst <= 1e-6, format!("worst relative error {worst:.2e} over 100 instances"))
}

fn derivation_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let s = DynamicsSetup::rotated(5, 0.5, 1.0, 0.5, 1e-3, 1000, seed);
        let a = simulate_dense_dynamics(&s).unwrap();
        let b = simulate_simplified_lodo(&s).unwrap();
        worst = worst.max(a.max_abs_diff(&b));
    }
    outcome(worst <= 1e-10, format!("max abs difference {worst:.2e} over 5 seeds"))
}

fn norm_decay() -> Outcome {
    let mut ratios = Vec::new();
    for seed in 0..5 {
        let s = DynamicsSetup::rotated(5, 0.5, 1.0, 0.5, 1e-4, 50_000, seed);
        let tr = simulate_dense_dynamics(&s).unwrap();
        let tail: Vec<f64> = tr.rows[45_000..].iter().map(|r| r.frob_bdinv).collect();
        ratios.push(mean(&tail) / tr.rows[0].frob_bdinv);
    }
    let good = ratios.iter().filter(|&&r| r <= 0.7).count();
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(good >= 4, format!("{good}/5 seeds decayed; final/initial = [{}]", shown.join(", ")))
}

fn newton_bound() -> Outcome {
    let v = NoisyQuadraticBowl::new(&BowlConfig::default(), 0).unwrap().newton_reference();
    outcome((v - 7.412).abs() <= 0.005, format!("newton reference {v:.4}"))
}

fn bowl_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::bowl_preset();
    let global = LodoConfig::bowl(Variant::Global);
    cfg.optimizers.push(NamedOptimizer {
        label: global.label(),
        spec: OptimizerSpec::Lodo(global),
    });
    cfg
}

fn row_mean(cfg: &ExperimentConfig, runs: &[GridRun], label: &str) -> (f64, usize) {
    let vals: Vec<Option<f64>> = runs.iter().filter(|r| r.label == label).map(|r| r.value(cfg)).collect();
    let ok: Vec<f64> = vals.iter().flatten().copied().collect();
    (mean(&ok), vals.len() - ok.len())
}

fn bowl_ordering(cfg: &ExperimentConfig, runs: &[GridRun]) -> Outcome {
    let (lodo, lodo_div) = row_mean(cfg, runs, "lodo");
    let (adam, _) = row_mean(cfg, runs, "adam");
    let baselines: Vec<(&str, f64)> = BaselineKind::ALL
        .iter()
        .map(|k| (k.name(), row_mean(cfg, runs, k.name()).0))
        .collect();
    let below_all = baselines.iter().all(|(_, m)| lodo < *m);
    let pass = (7.41..=12.0).contains(&lodo) && (14.0..=17.0).contains(&adam) && below_all;
    let listed: Vec<String> = baselines.iter().map(|(n, m)| format!("{n} {m:.3}")).collect();
    outcome(
        pass,
        format!("lodo {lodo:.3} ({lodo_div} diverged); {}", listed.join(", ")),
    )
}

fn sigma_decay(runs: &[GridRun]) -> Outcome {
    let mut early = Vec::new();
    let mut late = Vec::new();
    for r in runs.iter().filter(|r| r.label == "lodo" && r.record.diverged_at.is_none()) {
        let steps = r.record.steps;
        for &(s, v) in &r.record.sigma {
            if s < 10_000 {
                early.push(v);
            } else if s >= steps - 10_000 {
                late.push(v);
            }
        }
    }
    if early.is_empty() || late.is_empty() {
        return outcome(false, "no completed LODO runs with sigma samples".into());
    }
    let (e, l) = (mean(&early), mean(&late));
    outcome(l <= 0.5 * e, format!("sigma first 10k {e:.4}, last 10k {l:.4}, ratio {:.3}", l / e))
}

fn rosenbrock() -> Outcome {
    let mut cfg = ExperimentConfig::rosenbrock_preset();
    cfg.optimizers.truncate(1);
    let runs = run_grid(&cfg).unwrap();
    let (m, div) = row_mean(&cfg, &runs, "lodo");
    outcome(m <= 1e-2 && div == 0, format!("mean loss over steps 180-200 {m:.3e}, {div} diverged"))
}

fn ablation(cfg: &ExperimentConfig, runs: &[GridRun]) -> Outcome {
    let (full, _) = row_mean(cfg, runs, "lodo");
    let (global, _) = row_mean(cfg, runs, &LodoConfig::bowl(Variant::Global).label());
    let newton = NoisyQuadraticBowl::new(&BowlConfig::default(), 0).unwrap().newton_reference();
    let pass = full < global && global > 1.2 * newton;
    outcome(
        pass,
        format!("full {full:.3}, global {global:.3}, global/newton {:.3}", global / newton),
    )
}

fn entropy() -> Outcome {
    let ms = [1, 2, 4, 8, 16];
    let two = estimate_entropy_curve(2, &ms, 200, 3).unwrap();
    let zero = two.iter().all(|e| e.epsilon_hat == 0.0);
    let four = estimate_entropy_curve(4, &ms, 2000, 4).unwrap();
    let monotone = four.windows(2).all(|w| {
        w[1].epsilon_hat <= w[0].epsilon_hat + 2.0 * (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt()
    });
    let full = (0..100u64)
        .filter(|&s| reachable_fraction_for_seed(4, 20, derive_seed(10, &[s])).unwrap() == 1.0)
        .count();
    let curve: Vec<String> = four.iter().map(|e| format!("{:.3}", e.epsilon_hat)).collect();
    outcome(
        zero && monotone && full >= 95,
        format!(
            "eps(.,2) all zero: {zero}; eps(.,4) = [{}] monotone: {monotone}; full reach {full}/100",
            curve.join(", ")
        ),
    )
}

fn tuner() -> Outcome {
    let fam = OptimizerFamily::new(
        OptimizerSpec::Baseline(BaselineConfig::defaults(BaselineKind::Adam)),
        TaskSpec::Bowl(BowlConfig::default()),
    );
    let noise: Vec<f64> = Schedule::bowl().generations.iter().take(3).map(|g| g.noise_stddev).collect();
    let sched = Schedule::from_pairs(&noise.iter().map(|&s| (s, 2000)).collect::<Vec<_>>()).unwrap();
    let mut wins = 0;
    let mut shown = Vec::new();
    for seed in 0..3u64 {
        let out = tune(&fam, &sched, 8, seed).unwrap();
        let eval_seed = derive_seed(seed, &[0xe7a1]);
        let tuned = fam.fitness(&out.best, 2000, eval_seed).unwrap();
        let default = fam.fitness(&fam.defaults(), 2000, eval_seed).unwrap();
        if tuned <= default {
            wins += 1;
        }
        shown.push(format!("{tuned:.2} vs {default:.2}"));
    }
    outcome(wins >= 2, format!("{wins}/3 tuner seeds improved ({})", shown.join("; ")))
}

fn csv_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["", "curves"] {
        for e in std::fs::read_dir(dir.join(sub)).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "csv") {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let mut bowl = ExperimentConfig::bowl_preset();
    bowl.steps = 2000;
    bowl.seeds = 2;
    bowl.sigma_every = Some(500);
    let mut differing = Vec::new();
    let mut files = 0;
    for cfg in [bowl, ExperimentConfig::rosenbrock_preset()] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_suite(&cfg, a.path()).unwrap();
        run_suite(&cfg, b.path()).unwrap();
        let (x, y) = (csv_bytes(a.path()), csv_bytes(b.path()));
        files += x.len();
        if x.len() != y.len() {
            differing.push(format!("{}: file count", cfg.name));
        }
        for ((n, p), (_, q)) in x.iter().zip(&y) {
            if p != q {
                differing.push(format!("{}/{n}", cfg.name));
            }
        }
    }
    outcome(differing.is_empty(), format!("{files} CSV files compared, {} differ", differing.len()))
}

fn main() {
    let strict = std::env::var_os("LODO_ACCEPTANCE_STRICT").is_some();
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut check = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} [{id:>2}] {name}: {} ({secs:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o, secs));
    };

    check(1, "identity initialization", &mut identity_init);
    check(2, "hypergradient vs finite differences", &mut hypergradient_fd);
    check(3, "recurrence matches direct dense run", &mut derivation_equivalence);
    check(4, "rescaled error norm decays", &mut norm_decay);
    check(5, "newton bound", &mut newton_bound);

    let t = Instant::now();
    let cfg = bowl_config();
    let runs = run_grid(&cfg).unwrap();
    let grid_secs = t.elapsed().as_secs_f64();
    println!("     bowl grid: {} runs x {} steps in {grid_secs:.1}s", runs.len(), cfg.steps);
    check(6, "bowl comparison", &mut || bowl_ordering(&cfg, &runs));
    check(7, "sigma halves during bowl runs", &mut || sigma_decay(&runs));
    check(8, "rosenbrock", &mut rosenbrock);
    check(9, "full beats global, global far from newton", &mut || ablation(&cfg, &runs));
    check(10, "permutation entropy and reachability", &mut entropy);
    check(11, "tuner improves adam", &mut tuner);
    check(12, "suite reruns are byte-identical", &mut determinism);

    let passed = results.iter().filter(|r| r.2.pass).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.0}s",
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if strict && passed < results.len() {
        std::process::exit(1);
    }
}
