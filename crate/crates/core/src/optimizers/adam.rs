/// Bias-corrected Adam over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl AdamState {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPS: f64 = 1e-8;

    pub fn new(dim: usize, lr: f64) -> Self {
        Self::with_betas(dim, lr, Self::BETA1, Self::BETA2, Self::EPS)
    }

    pub fn with_betas(dim: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            first: vec![0.0; dim],
            second: vec![0.0; dim],
        }
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second
    }

    /// `params ← params − lr · m̂ / (√v̂ + eps)`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        self.t += 1;
        let step = self.lr / (1.0 - self.beta1.powi(self.t as i32));
        let inv_bc2 = 1.0 / (1.0 - self.beta2.powi(self.t as i32));
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= step * *m / ((*v * inv_bc2).sqrt() + self.eps);
        }
    }
}

/// Update rule for a preconditioner's own parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MetaOptimizer {
    Adam(AdamState),
    /// Plain gradient descent, as in the simplified dynamics analysis.
    Sgd { lr: f64 },
}

impl MetaOptimizer {
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        match self {
            MetaOptimizer::Adam(adam) => adam.step(params, grad),
            MetaOptimizer::Sgd { lr } => {
                params.iter_mut().zip(grad).for_each(|(p, g)| *p -= *lr * g);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        // bias correction makes the first step exactly lr·g/(|g| + eps)
        let mut adam = AdamState::new(2, 0.1);
        let mut p = [0.0, 0.0];
        adam.step(&mut p, &[1.0, 0.0]);
        let want = -0.1 * 1.0 / (1.0 + 1e-8);
        assert!((p[0] - want).abs() < 1e-15, "{}", p[0]);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn second_moment_stays_nonnegative() {
        let mut adam = AdamState::new(3, 0.01);
        let mut p = [0.0; 3];
        for i in 0..50 {
            let s = (i as f64).sin();
            adam.step(&mut p, &[s, -s * 3.0, 0.0]);
            assert!(adam.second_moment().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn sgd_meta_step() {
        let mut sgd = MetaOptimizer::Sgd { lr: 0.5 };
        let mut p = [1.0, 2.0];
        sgd.step(&mut p, &[2.0, -2.0]);
        assert_eq!(p, [0.0, 3.0]);
    }
}
