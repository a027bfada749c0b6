use lodo_core::gmat::{GNetConfig, Preconditioner, Variant};
use lodo_core::linalg::{dot, norm_inf, normal_vec, spectral_norm};
use lodo_core::rng::rng_from_seed;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

/// Random operator of the given variant with its parameters pushed away from
/// the identity initialization.
fn scrambled(variant: Variant, n: usize, k: usize, depth: usize, seed: u64) -> Preconditioner {
    let cfg = GNetConfig::new(n).block_size(k).depth(depth).alpha0(0.7).seed(seed);
    let mut p = Preconditioner::build(variant, &cfg).unwrap();
    let mut rng = rng_from_seed(seed ^ 0xabcdef);
    let len = p.num_params();
    let residual_split = match &p {
        Preconditioner::Residual(r) => r.weights().len(),
        _ => len,
    };
    for (i, t) in p.params_mut().iter_mut().enumerate() {
        let z: f64 = rng.random_range(-0.4..0.4);
        // keep the residual middle diagonal positive so the operator stays PSD
        *t = if i >= residual_split { rng.random_range(0.2..1.5) } else { *t + z };
    }
    p
}

fn loss(p: &Preconditioner, m: &[f64], g: &[f64]) -> f64 {
    -dot(g, &p.apply(m).unwrap())
}

/// Largest relative error between the analytic hypergradient and central
/// differences. The loss is at most quadratic in any single parameter, so
/// central differences carry no truncation error and a moderate step keeps
/// rounding small. Components far below the gradient's own scale are
/// compared against that scale.
fn fd_error(p: &Preconditioner, m: &[f64], g: &[f64]) -> f64 {
    let analytic = p.hypergrad(m, g).unwrap().0;
    let floor = 1e-4 * norm_inf(&analytic).max(1e-12);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for j in 0..p.num_params() {
        let mut q = p.clone();
        q.params_mut()[j] += h;
        let up = loss(&q, m, g);
        q.params_mut()[j] -= 2.0 * h;
        let down = loss(&q, m, g);
        let fd = (up - down) / (2.0 * h);
        let denom = analytic[j].abs().max(fd.abs()).max(floor);
        worst = worst.max((analytic[j] - fd).abs() / denom);
    }
    worst
}

#[test]
fn full_hypergradient_matches_finite_differences_on_many_instances() {
    let mut rng = rng_from_seed(17);
    let mut worst: f64 = 0.0;
    for inst in 0..120u64 {
        let n = rng.random_range(2..=8);
        let depth = rng.random_range(1..=4);
        let p = scrambled(Variant::Full, n, 2, depth, inst);
        let m = normal_vec(n, &mut rng);
        let g = normal_vec(n, &mut rng);
        worst = worst.max(fd_error(&p, &m, &g));
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}

#[test]
fn other_variants_match_finite_differences() {
    let mut rng = rng_from_seed(5);
    for variant in [Variant::Diagonal, Variant::Global, Variant::Residual] {
        for inst in 0..20u64 {
            let n = rng.random_range(2..=8);
            let p = scrambled(variant, n, 2, 3, inst);
            let m = normal_vec(n, &mut rng);
            let g = normal_vec(n, &mut rng);
            let e = fd_error(&p, &m, &g);
            assert!(e <= 1e-6, "{variant:?} instance {inst}: {e:e}");
        }
    }
    let n = 5;
    let dense = Preconditioner::dense(0.8, DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin())).unwrap();
    let m = normal_vec(n, &mut rng);
    let g = normal_vec(n, &mut rng);
    assert!(fd_error(&dense, &m, &g) <= 1e-6);
}

#[test]
fn fresh_operators_are_scaled_identity() {
    let mut rng = rng_from_seed(99);
    for variant in [Variant::Full, Variant::Diagonal, Variant::Global, Variant::Residual] {
        for &(n, k) in &[(100, 4), (7, 4), (3, 2), (1, 4)] {
            let alpha0 = 0.37;
            let p = Preconditioner::build(variant, &GNetConfig::new(n).block_size(k).alpha0(alpha0).seed(3)).unwrap();
            for _ in 0..100 {
                let v = normal_vec(n, &mut rng);
                let gv = p.apply(&v).unwrap();
                let err = gv.iter().zip(&v).map(|(a, b)| (a - alpha0 * b).abs()).fold(0.0, f64::max);
                assert!(err <= 1e-9 * alpha0 * norm_inf(&v), "{variant:?} n={n}: {err:e}");
            }
        }
    }
}

fn variant_strategy() -> impl Strategy<Value = Variant> {
    prop_oneof![
        Just(Variant::Full),
        Just(Variant::Diagonal),
        Just(Variant::Global),
        Just(Variant::Residual),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operators_are_symmetric(variant in variant_strategy(), n in 1usize..16, k in 2usize..5, depth in 1usize..6, seed in any::<u64>()) {
        let p = scrambled(variant, n, k, depth, seed);
        let norm = spectral_norm(&p.materialize_dense().unwrap());
        let mut rng = rng_from_seed(seed);
        for _ in 0..5 {
            let v = normal_vec(n, &mut rng);
            let w = normal_vec(n, &mut rng);
            let lhs = dot(&v, &p.apply(&w).unwrap());
            let rhs = dot(&w, &p.apply(&v).unwrap());
            let scale = dot(&v, &v).sqrt() * dot(&w, &w).sqrt() * norm;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
        }
    }

    #[test]
    fn full_and_residual_are_positive_semidefinite(residual in any::<bool>(), n in 1usize..16, depth in 1usize..6, seed in any::<u64>()) {
        let variant = if residual { Variant::Residual } else { Variant::Full };
        let p = scrambled(variant, n, 4, depth, seed);
        prop_assert_eq!(p.psd_violations(), 0);
        let norm = spectral_norm(&p.materialize_dense().unwrap());
        let mut rng = rng_from_seed(seed.wrapping_add(1));
        for _ in 0..10 {
            let v = normal_vec(n, &mut rng);
            prop_assert!(dot(&v, &p.apply(&v).unwrap()) >= -1e-10 * dot(&v, &v) * norm);
        }
    }

    #[test]
    fn apply_agrees_with_materialized_matrix(variant in variant_strategy(), n in 1usize..=16, depth in 1usize..5, seed in any::<u64>()) {
        let p = scrambled(variant, n, 2, depth, seed);
        let m = p.materialize_dense().unwrap();
        let mut rng = rng_from_seed(seed.wrapping_mul(3));
        let v = normal_vec(n, &mut rng);
        let direct = p.apply(&v).unwrap();
        let dense = &m * nalgebra::DVector::from_column_slice(&v);
        let scale = norm_inf(&direct).max(1e-300);
        for (a, b) in direct.iter().zip(dense.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn checkpoint_restores_the_same_operator(variant in variant_strategy(), n in 1usize..12, seed in any::<u64>()) {
        let p = scrambled(variant, n, 2, 3, seed);
        let q = Preconditioner::from_checkpoint(&p.to_checkpoint()).unwrap();
        prop_assert_eq!(p, q);
    }
}
