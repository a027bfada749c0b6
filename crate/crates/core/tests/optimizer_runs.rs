use lodo_core::gmat::{GNetConfig, Preconditioner, Variant};
use lodo_core::linalg::normal_vec;
use lodo_core::optimizers::{
    run, BaselineConfig, BaselineKind, LodoConfig, LodoState, MetaOptimizer, Optimizer, OptimizerSpec, RunOptions,
};
use lodo_core::rng::rng_from_seed;
use lodo_core::stats::mean;
use lodo_core::tasks::{BowlConfig, NoisyQuadraticBowl, Task, TaskSpec};

fn small_bowl() -> TaskSpec {
    TaskSpec::Bowl(BowlConfig {
        dim: 20,
        ..BowlConfig::default()
    })
}

fn all_specs() -> Vec<OptimizerSpec> {
    let mut v: Vec<OptimizerSpec> = [Variant::Full, Variant::Diagonal, Variant::Global, Variant::Residual]
        .into_iter()
        .map(|var| OptimizerSpec::Lodo(LodoConfig::bowl(var)))
        .collect();
    v.extend(BaselineKind::ALL.map(|k| OptimizerSpec::Baseline(BaselineConfig::bowl(k))));
    v
}

#[test]
fn runs_are_deterministic_per_seed() {
    let task = small_bowl();
    for spec in all_specs() {
        let a = run(&spec, &task, 300, 11, &RunOptions::default()).unwrap();
        let b = run(&spec, &task, 300, 11, &RunOptions::default()).unwrap();
        let c = run(&spec, &task, 300, 12, &RunOptions::default()).unwrap();
        assert!(a.losses == b.losses && a.diverged_at == b.diverged_at, "{}", spec.label());
        assert_ne!(a.losses, c.losses, "{}", spec.label());
    }
}

#[test]
fn diagnostics_do_not_perturb_the_trajectory() {
    let spec = OptimizerSpec::Lodo(LodoConfig::bowl(Variant::Full));
    let task = small_bowl();
    let plain = run(&spec, &task, 500, 4, &RunOptions::default()).unwrap();
    let probed = run(
        &spec,
        &task,
        500,
        4,
        &RunOptions {
            sigma_every: Some(50),
            sigma_probes: 20,
            record_wall_clock: true,
        },
    )
    .unwrap();
    assert_eq!(plain.losses, probed.losses);
    assert_eq!(probed.sigma.len(), 10);
    assert_eq!(probed.sigma[3].0, 150);
    assert_eq!(probed.step_ms.len(), 500);
    assert!(plain.sigma.is_empty() && plain.step_ms.is_empty());
}

#[test]
fn one_meta_step_improves_the_counterfactual_loss() {
    let n = 12;
    let mut rng = rng_from_seed(8);
    for trial in 0..10u64 {
        let mut task = NoisyQuadraticBowl::new(
            &BowlConfig {
                dim: n,
                eig_min: 0.05,
                hessian_seed: trial,
                ..BowlConfig::default()
            },
            trial,
        )
        .unwrap();
        task.set_frozen(true);
        let precond = Preconditioner::full(&GNetConfig::new(n).alpha0(0.5).depth(4).seed(trial)).unwrap();
        let x0 = normal_vec(n, &mut rng);
        let mut state = LodoState::with_preconditioner(precond, MetaOptimizer::Sgd { lr: 1e-4 }, 0.0, x0).unwrap();
        state.step(&mut task).unwrap();

        let x1 = state.x().to_vec();
        let m1 = state.momentum().to_vec();
        let before = state.preconditioner().clone();
        let loss_old = state.step(&mut task).unwrap();
        let after = state.preconditioner();
        assert_ne!(&before, after);

        let x_cf: Vec<f64> = x1.iter().zip(after.apply(&m1).unwrap()).map(|(x, s)| x - s).collect();
        let mut grad = vec![0.0; n];
        let loss_new = task.eval(&x_cf, &mut grad);
        assert!(loss_new < loss_old, "trial {trial}: {loss_new} >= {loss_old}");
    }
}

#[test]
fn diverged_runs_stop_cleanly() {
    let spec = OptimizerSpec::Lodo(LodoConfig {
        alpha0: 50.0,
        ..LodoConfig::bowl(Variant::Full)
    });
    let rec = run(&spec, &small_bowl(), 2000, 0, &RunOptions::default()).unwrap();
    let at = rec.diverged_at.expect("a step size this large must diverge");
    assert_eq!(rec.losses.len(), at);
    assert!(rec.losses.iter().all(|l| l.is_finite()));

    let mut task = NoisyQuadraticBowl::new(&BowlConfig::default(), 1).unwrap();
    let cfg = LodoConfig {
        alpha0: 50.0,
        ..LodoConfig::bowl(Variant::Full)
    };
    let mut state = LodoState::new(&cfg, task.initial_point(), 0).unwrap();
    for _ in 0..2000 {
        if state.step(&mut task).is_none() {
            break;
        }
    }
    assert!(state.is_diverged());
    assert!(state.step(&mut task).is_none());
    assert!(state.x().iter().all(|v| v.is_finite()));
    assert!(state.preconditioner().params().iter().all(|v| v.is_finite()));
}

#[test]
fn resting_on_the_bowl_loses_half_the_trace_per_step() {
    let cfg = BowlConfig::default();
    let steps = 10_000usize;
    let (mut num, mut den) = (0.0, 0.0);
    for seed in 0..64 {
        let mut task = NoisyQuadraticBowl::new(&cfg, seed).unwrap();
        let x = vec![0.0; cfg.dim];
        let mut grad = vec![0.0; cfg.dim];
        for t in 1..=steps {
            let l = task.eval(&x, &mut grad);
            num += t as f64 * l;
            den += (t * t) as f64;
        }
    }
    let slope = num / den;
    let target = NoisyQuadraticBowl::new(&cfg, 0).unwrap().newton_reference();
    assert!((slope / target - 1.0).abs() < 0.1, "slope {slope} vs {target}");
}

#[test]
fn lodo_solves_the_rosenbrock_function() {
    let spec = OptimizerSpec::Lodo(LodoConfig::rosenbrock());
    let rec = run(&spec, &TaskSpec::Rosenbrock, 200, 3, &RunOptions::default()).unwrap();
    assert!(rec.losses[0] > 1.0);
    assert!(mean(&rec.losses[180..200]) < 1e-2);
}

#[test]
fn lodo_beats_standing_still_on_a_short_bowl_run() {
    let task = TaskSpec::Bowl(BowlConfig::default());
    let rec = run(&OptimizerSpec::Lodo(LodoConfig::bowl(Variant::Global)), &task, 3000, 2, &RunOptions::default()).unwrap();
    assert!(rec.diverged_at.is_none());
    // resting at the start would average about 7.4 · 1500 by now
    assert!(mean(&rec.losses[2700..]) < 100.0);
}
