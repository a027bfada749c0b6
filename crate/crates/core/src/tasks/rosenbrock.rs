use super::Task;

/// Starting point used by the Rosenbrock benchmark.
pub const ROSENBROCK_START: [f64; 2] = [-0.5, 2.0];

/// Rescaled Rosenbrock function `f(x, y) = 0.01(x − 1)² + (x² − y)²`,
/// minimized at `(1, 1)`.
pub fn rosenbrock_eval(p: &[f64]) -> (f64, [f64; 2]) {
    let (x, y) = (p[0], p[1]);
    let r = x * x - y;
    let loss = 0.01 * (x - 1.0).powi(2) + r * r;
    let grad = [0.02 * (x - 1.0) + 4.0 * x * r, -2.0 * r];
    (loss, grad)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Rosenbrock;

impl Task for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn initial_point(&self) -> Vec<f64> {
        ROSENBROCK_START.to_vec()
    }

    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (loss, g) = rosenbrock_eval(x);
        grad.copy_from_slice(&g);
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn minimum_and_start_values() {
        let (l, g) = rosenbrock_eval(&[1.0, 1.0]);
        assert_eq!(l, 0.0);
        assert_eq!(g, [0.0, 0.0]);
        let (l, _) = rosenbrock_eval(&ROSENBROCK_START);
        assert!((l - 3.085).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = rng_from_seed(21);
        let h = 1e-5;
        for _ in 0..20 {
            let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..3.0)];
            let (_, g) = rosenbrock_eval(&p);
            for i in 0..2 {
                let mut hi = p;
                let mut lo = p;
                hi[i] += h;
                lo[i] -= h;
                let fd = (rosenbrock_eval(&hi).0 - rosenbrock_eval(&lo).0) / (2.0 * h);
                let rel = (fd - g[i]).abs() / g[i].abs().max(1e-3);
                assert!(rel < 1e-7, "p={p:?} i={i} fd={fd} g={}", g[i]);
            }
        }
    }
}
