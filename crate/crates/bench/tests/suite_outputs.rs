use std::path::Path;

use lodo_bench::config::{ExperimentConfig, SweepSettings};
use lodo_bench::report::{parse_curve, summarize_curves, CURVE_HEADER};
use lodo_bench::{momentum_sweep, run_suite};
use lodo_core::stats::Window;

const SMALL_BOWL: &str = "
[experiment]
name = small
steps = 300
seeds = 3
master_seed = 5
sigma_every = 100
sigma_probes = 10

[task]
kind = bowl
dim = 12

[optimizer lodo]
family = lodo
preset = bowl
meta_lr = 0.001

[optimizer adam]
family = adam
preset = bowl

[optimizer wild]
family = momentum
lr = 40
";

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["", "curves"] {
        let d = dir.join(sub);
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_file() && p.file_name().unwrap() != "summary.json" {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn summary_matches_curves_and_reruns_are_identical() {
    let cfg = ExperimentConfig::parse(SMALL_BOWL).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let rows = run_suite(&cfg, a.path()).unwrap();
    run_suite(&cfg, b.path()).unwrap();

    assert_eq!(rows.len(), 3);
    let wild = rows.iter().find(|r| r.optimizer == "wild").unwrap();
    assert_eq!((wild.runs, wild.diverged), (3, 3));
    assert!(rows[0].mean.is_finite() && rows[1].mean.is_finite());

    let recomputed = summarize_curves(a.path(), &cfg.window).unwrap();
    assert_eq!(recomputed.len(), rows.len());
    for (r, c) in rows.iter().zip(&recomputed) {
        assert_eq!((&r.optimizer, r.runs, r.diverged), (&c.optimizer, c.runs, c.diverged));
        if r.mean.is_nan() {
            assert!(c.mean.is_nan());
        } else {
            assert!((r.mean - c.mean).abs() <= 1e-12 * r.mean.abs().max(1.0));
            assert!((r.std - c.std).abs() <= 1e-12 * r.std.abs().max(1.0));
        }
    }

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["config"].as_str().unwrap(), cfg.render());
    assert_eq!(json["runs"].as_array().unwrap().len(), 9);
    for (r, j) in rows.iter().zip(json["rows"].as_array().unwrap()) {
        if r.mean.is_finite() {
            assert_eq!(j["mean"].as_f64().unwrap(), r.mean);
        }
    }

    let left = read_dir_sorted(a.path());
    assert_eq!(left.len(), 10);
    assert_eq!(left, read_dir_sorted(b.path()));
}

#[test]
fn curve_files_echo_config_and_sigma() {
    let cfg = ExperimentConfig::parse(SMALL_BOWL).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_suite(&cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("curves/lodo_seed1.csv")).unwrap();
    for line in cfg.render().lines().filter(|l| !l.is_empty()) {
        assert!(text.contains(&format!("# {line}\n")), "missing '{line}'");
    }
    assert!(text.contains(&format!("\n{CURVE_HEADER}\n")));
    assert!(!text.contains('\r'));
    let curve = parse_curve(&text).unwrap();
    assert_eq!(curve.optimizer, "lodo");
    assert_eq!(curve.seed_index, 1);
    assert!(!curve.diverged);
    assert_eq!(curve.losses.len(), 300);
    assert_eq!(curve.sigma.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 100, 200]);

    let adam = parse_curve(&std::fs::read_to_string(dir.path().join("curves/adam_seed0.csv")).unwrap()).unwrap();
    assert!(adam.sigma.is_empty());
    let wild = parse_curve(&std::fs::read_to_string(dir.path().join("curves/wild_seed0.csv")).unwrap()).unwrap();
    assert!(wild.diverged && wild.losses.len() < 300);
}

#[test]
fn seeds_are_shared_across_optimizers() {
    let cfg = ExperimentConfig::parse(SMALL_BOWL).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_suite(&cfg, dir.path()).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let runs = json["runs"].as_array().unwrap();
    for k in 0..3 {
        let seeds: Vec<u64> = runs
            .iter()
            .filter(|r| r["seed_index"] == k)
            .map(|r| r["seed"].as_u64().unwrap())
            .collect();
        assert_eq!(seeds.len(), 3);
        assert!(seeds.iter().all(|s| *s == seeds[0]));
    }
}

#[test]
fn invalid_config_writes_nothing() {
    let mut cfg = ExperimentConfig::parse(SMALL_BOWL).unwrap();
    cfg.optimizers.clear();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(run_suite(&cfg, &out).is_err());
    assert!(!out.exists());
}

#[test]
fn rosenbrock_window_covers_steps_180_to_200() {
    let cfg = ExperimentConfig::rosenbrock_preset();
    assert_eq!(cfg.window, Window::Range { start: 180, end: 200 });
    let dir = tempfile::tempdir().unwrap();
    let rows = run_suite(&cfg, dir.path()).unwrap();
    let lodo = &rows[0];
    assert_eq!(lodo.optimizer, "lodo");
    assert_eq!(lodo.diverged, 0);
    assert!(lodo.mean < 1e-2, "{}", lodo.mean);
}

#[test]
fn sweep_runs_every_decay() {
    let mut cfg = ExperimentConfig::parse(SMALL_BOWL).unwrap();
    cfg.seeds = 2;
    cfg.sigma_every = None;
    cfg.sweep = Some(SweepSettings { betas: vec![0.0, 0.5, 0.9] });
    let pts = momentum_sweep(&cfg).unwrap();
    assert_eq!(pts.iter().map(|p| p.beta).collect::<Vec<_>>(), vec![0.0, 0.5, 0.9]);
    for p in &pts {
        assert_eq!(p.runs, 2);
        assert!(p.loss.is_finite());
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in std::fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        let cfg = ExperimentConfig::parse(&std::fs::read_to_string(&p).unwrap());
        assert!(cfg.is_ok(), "{}: {:?}", p.display(), cfg.err());
        n += 1;
    }
    assert!(n >= 4);
}
