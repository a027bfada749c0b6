//! Dense-preconditioner learning dynamics.
//!
//! With a dense `G`, no momentum, and plain gradient descent on `G`, LODO on
//! the noisy bowl reduces to the recurrence
//!
//! ```text
//! b_{t+1} = A_t b_t − s_t
//! A_{t+1} = A_t − α H b_{t+1} b_tᵀ H²
//! ```
//!
//! on `A_t = I − G_t H` and `b_t = x_t − x*_t`. [`simulate_dense_dynamics`]
//! iterates the recurrence; [`simulate_simplified_lodo`] runs the optimizer
//! itself so the two can be compared step for step.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, LodoError, Result};
use crate::gmat::Preconditioner;
use crate::linalg::{haar_orthogonal, spectral_norm};
use crate::rng::rng_from_seed;
use crate::optimizers::{LodoState, MetaOptimizer, Optimizer};
use crate::tasks::{draw_offset, geometric_spectrum, noise_stream};
use crate::tasks::NoisyQuadraticBowl;

#[derive(Debug, Clone)]
pub struct DynamicsSetup {
    pub hessian: DMatrix<f64>,
    /// Diagonal of the noise covariance `Σ`; identity when absent.
    pub noise_variance: Option<Vec<f64>>,
    pub a0: DMatrix<f64>,
    pub alpha: f64,
    pub steps: usize,
    pub seed: u64,
}

impl DynamicsSetup {
    /// A randomly rotated Hessian with geometric spectrum in `[lo, hi]`,
    /// `A₀ = a0·I`, and identity noise. The rotation comes from `seed`.
    pub fn rotated(n: usize, lo: f64, hi: f64, a0: f64, alpha: f64, steps: usize, seed: u64) -> Self {
        let u = haar_orthogonal(n, &mut rng_from_seed(seed));
        let d = DMatrix::from_diagonal(&DVector::from_vec(geometric_spectrum(n, lo, hi)));
        let h = &u * d * u.transpose();
        Self {
            hessian: (&h + h.transpose()) * 0.5,
            noise_variance: None,
            a0: DMatrix::identity(n, n) * a0,
            alpha,
            steps,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DynamicsRow {
    pub t: usize,
    pub frob_a: f64,
    pub frob_bdinv: f64,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct DynamicsTrace {
    pub rows: Vec<DynamicsRow>,
    pub final_a: DMatrix<f64>,
    pub final_b: Vec<f64>,
}

impl DynamicsTrace {
    /// Largest absolute difference between two traces of equal length, over
    /// every row field and the final `A` and `b`.
    pub fn max_abs_diff(&self, other: &DynamicsTrace) -> f64 {
        if self.rows.len() != other.rows.len() {
            return f64::INFINITY;
        }
        let rows = self.rows.iter().zip(&other.rows).fold(0.0f64, |m, (a, b)| {
            m.max((a.frob_a - b.frob_a).abs())
                .max((a.frob_bdinv - b.frob_bdinv).abs())
                .max((a.loss - b.loss).abs())
        });
        let a = (&self.final_a - &other.final_a).abs().max();
        let b = self.final_b.iter().zip(&other.final_b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        rows.max(a).max(b)
    }
}

struct Checked {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    noise_sd: Option<Vec<f64>>,
}

fn check_setup(s: &DynamicsSetup) -> Result<Checked> {
    let h = &s.hessian;
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(LodoError::InvalidArgument("Hessian must be square and non-empty".into()));
    }
    check_dim(n, s.a0.nrows())?;
    check_dim(n, s.a0.ncols())?;
    let asym = (h - h.transpose()).abs().max();
    if asym > 1e-12 * h.abs().max() {
        return Err(LodoError::InvalidArgument("Hessian is not symmetric".into()));
    }
    let eig = h.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&d| d <= 0.0) {
        return Err(LodoError::InvalidArgument("Hessian is not positive definite".into()));
    }
    let a_norm = spectral_norm(&s.a0);
    if a_norm >= 1.0 {
        return Err(LodoError::InvalidArgument(format!(
            "initial error operator must have spectral norm < 1, got {a_norm}"
        )));
    }
    let h_norm = eig.eigenvalues.max();
    if s.alpha * h_norm.powi(3) > 0.01 {
        log::warn!("alpha·‖H‖³ = {} exceeds 0.01; the slow-drift picture may not hold", s.alpha * h_norm.powi(3));
    }
    let noise_sd = match &s.noise_variance {
        Some(v) => {
            check_dim(n, v.len())?;
            Some(v.iter().map(|x| x.sqrt()).collect())
        }
        None => None,
    };
    Ok(Checked { eig, noise_sd })
}

/// `‖Uᵀ A U D⁻¹‖_F` for `H = U D Uᵀ`.
fn frob_bdinv(a: &DMatrix<f64>, eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> f64 {
    let u = &eig.eigenvectors;
    let mut b = u.transpose() * a * u;
    for (j, d) in eig.eigenvalues.iter().enumerate() {
        b.column_mut(j).unscale_mut(*d);
    }
    b.norm()
}

fn quad_loss(h: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    0.5 * b.dot(&(h * b))
}

pub fn simulate_dense_dynamics(setup: &DynamicsSetup) -> Result<DynamicsTrace> {
    let Checked { eig, noise_sd } = check_setup(setup)?;
    let h = &setup.hessian;
    let n = h.nrows();
    let h2 = h * h;
    let mut a = setup.a0.clone();
    let mut b = DVector::zeros(n);
    let mut rng = noise_stream(setup.seed);

    let mut rows = Vec::with_capacity(setup.steps + 1);
    rows.push(DynamicsRow {
        t: 0,
        frob_a: a.norm(),
        frob_bdinv: frob_bdinv(&a, &eig),
        loss: quad_loss(h, &b),
    });
    for t in 0..setup.steps {
        let s = DVector::from_vec(draw_offset(&mut rng, n, noise_sd.as_deref()));
        let b_next = &a * &b - s;
        if setup.alpha != 0.0 {
            let left = h * &b_next;
            let right = &h2 * &b;
            a.ger(-setup.alpha, &left, &right, 1.0);
        }
        b = b_next;
        rows.push(DynamicsRow {
            t: t + 1,
            frob_a: a.norm(),
            frob_bdinv: frob_bdinv(&a, &eig),
            loss: quad_loss(h, &b),
        });
    }
    Ok(DynamicsTrace {
        rows,
        final_a: a,
        final_b: b.iter().cloned().collect(),
    })
}

/// Run LODO itself with a dense `G = (I − A₀) H⁻¹`, `β = 0`, and gradient
/// descent on `G`, reporting the same quantities as [`simulate_dense_dynamics`].
pub fn simulate_simplified_lodo(setup: &DynamicsSetup) -> Result<DynamicsTrace> {
    let Checked { eig, .. } = check_setup(setup)?;
    let h = &setup.hessian;
    let n = h.nrows();
    let h_inv = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|d| 1.0 / d))
        * eig.eigenvectors.transpose();
    let g0 = (DMatrix::identity(n, n) - &setup.a0) * h_inv;
    let precond = Preconditioner::dense(1.0, g0)?;
    let mut bowl = NoisyQuadraticBowl::from_hessian(h.clone(), setup.seed)?;
    if let Some(v) = &setup.noise_variance {
        bowl = bowl.with_noise_variance(v)?;
    }
    let mut lodo = LodoState::with_preconditioner(precond, MetaOptimizer::Sgd { lr: setup.alpha }, 0.0, vec![0.0; n])?;

    let error_op = |p: &Preconditioner| -> Result<DMatrix<f64>> { Ok(DMatrix::identity(n, n) - p.materialize_dense()? * h) };
    let a = error_op(lodo.preconditioner())?;
    let mut rows = Vec::with_capacity(setup.steps + 1);
    rows.push(DynamicsRow {
        t: 0,
        frob_a: a.norm(),
        frob_bdinv: frob_bdinv(&a, &eig),
        loss: 0.0,
    });
    for t in 0..setup.steps {
        let loss = lodo
            .step(&mut bowl)
            .ok_or_else(|| LodoError::Domain(format!("simplified LODO diverged at step {t}")))?;
        let a = error_op(lodo.preconditioner())?;
        rows.push(DynamicsRow {
            t: t + 1,
            frob_a: a.norm(),
            frob_bdinv: frob_bdinv(&a, &eig),
            loss,
        });
    }
    let final_a = error_op(lodo.preconditioner())?;
    let final_b = lodo.x().iter().zip(bowl.center()).map(|(x, c)| x - c).collect();
    Ok(DynamicsTrace { rows, final_a, final_b })
}
