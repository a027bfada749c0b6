//! Noisy quadratic bowl.
//!
//! `f(x) = ½ (x − c)ᵀ H (x − c)` with `H = U D Uᵀ`, `U` Haar-random and `D` a
//! geometric spectrum. Every evaluation first moves the center `c` by a fresh
//! Gaussian offset, so a stationary optimizer sees its loss grow linearly.

use nalgebra::DMatrix;

use super::Task;
use crate::error::{check_dim, LodoError, Result};
use crate::linalg::{haar_orthogonal, matvec_into, normal_vec};
use crate::rng::{stream, Rng};

const HESSIAN_STREAM: u64 = 0x6865_7373;
const NOISE_STREAM: u64 = 0x6e6f_6973;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BowlConfig {
    pub dim: usize,
    pub eig_min: f64,
    pub eig_max: f64,
    /// Seed for the eigenbasis `U`; independent of optimizer and noise seeds.
    pub hessian_seed: u64,
    /// Per-coordinate variance of the center's random walk (identity when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_variance: Option<Vec<f64>>,
}

impl Default for BowlConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            eig_min: 0.001,
            eig_max: 1.0,
            hessian_seed: 0,
            noise_variance: None,
        }
    }
}

/// `n` values in geometric progression from `lo` to `hi` inclusive.
pub fn geometric_spectrum(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = hi / lo;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * ratio.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// The random stream that drives the center's walk for a given seed.
pub fn noise_stream(seed: u64) -> Rng {
    stream(seed, &[NOISE_STREAM])
}

/// One step of the center's walk: `N(0, diag(variance))`.
pub fn draw_offset(rng: &mut Rng, n: usize, std_dev: Option<&[f64]>) -> Vec<f64> {
    let mut s = normal_vec(n, rng);
    if let Some(sd) = std_dev {
        s.iter_mut().zip(sd).for_each(|(x, d)| *x *= d);
    }
    s
}

pub struct NoisyQuadraticBowl {
    hessian: DMatrix<f64>,
    spectrum: Option<Vec<f64>>,
    noise_sd: Option<Vec<f64>>,
    center: Vec<f64>,
    rng: Rng,
    frozen: bool,
    diff: Vec<f64>,
}

impl NoisyQuadraticBowl {
    pub fn new(cfg: &BowlConfig, noise_seed: u64) -> Result<Self> {
        if cfg.dim == 0 {
            return Err(LodoError::InvalidArgument("bowl dimension must be positive".into()));
        }
        if !(cfg.eig_min > 0.0 && cfg.eig_max >= cfg.eig_min && cfg.eig_max.is_finite()) {
            return Err(LodoError::InvalidArgument(format!(
                "bowl spectrum must satisfy 0 < eig_min <= eig_max, got [{}, {}]",
                cfg.eig_min, cfg.eig_max
            )));
        }
        let mut rng = stream(cfg.hessian_seed, &[HESSIAN_STREAM]);
        let u = haar_orthogonal(cfg.dim, &mut rng);
        let spectrum = geometric_spectrum(cfg.dim, cfg.eig_min, cfg.eig_max);
        let mut bowl = Self::from_eigen(&u, &spectrum, noise_seed)?;
        if let Some(var) = &cfg.noise_variance {
            bowl = bowl.with_noise_variance(var)?;
        }
        Ok(bowl)
    }

    /// Bowl with `H = U diag(spectrum) Uᵀ`.
    pub fn from_eigen(u: &DMatrix<f64>, spectrum: &[f64], noise_seed: u64) -> Result<Self> {
        check_dim(u.nrows(), spectrum.len())?;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(spectrum));
        let mut h = u * d * u.transpose();
        symmetrize(&mut h);
        let mut bowl = Self::from_hessian(h, noise_seed)?;
        bowl.spectrum = Some(spectrum.to_vec());
        Ok(bowl)
    }

    /// Bowl with an explicit symmetric positive-definite Hessian.
    pub fn from_hessian(hessian: DMatrix<f64>, noise_seed: u64) -> Result<Self> {
        let n = hessian.nrows();
        if n == 0 || hessian.ncols() != n {
            return Err(LodoError::InvalidArgument("Hessian must be square and non-empty".into()));
        }
        Ok(Self {
            hessian,
            spectrum: None,
            noise_sd: None,
            center: vec![0.0; n],
            rng: noise_stream(noise_seed),
            frozen: false,
            diff: vec![0.0; n],
        })
    }

    /// Use a diagonal noise covariance instead of the identity.
    pub fn with_noise_variance(mut self, variance: &[f64]) -> Result<Self> {
        check_dim(self.center.len(), variance.len())?;
        if variance.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(LodoError::InvalidArgument("noise variances must be finite and >= 0".into()));
        }
        self.noise_sd = Some(variance.iter().map(|v| v.sqrt()).collect());
        Ok(self)
    }

    /// Stop (or resume) the center's random walk. Test hook.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn hessian_matrix(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn spectrum(&self) -> Option<&[f64]> {
        self.spectrum.as_deref()
    }

    /// Expected loss of the policy that jumps to the current center every
    /// step: `½ tr(H Σ)`, i.e. `½ Σ D` for identity noise.
    pub fn newton_reference(&self) -> f64 {
        match (&self.spectrum, &self.noise_sd) {
            (Some(d), None) => 0.5 * d.iter().sum::<f64>(),
            (_, sd) => {
                0.5 * (0..self.center.len())
                    .map(|i| {
                        let var = sd.as_ref().map_or(1.0, |s| s[i] * s[i]);
                        self.hessian[(i, i)] * var
                    })
                    .sum::<f64>()
            }
        }
    }

    /// Loss and gradient at `x` against the current center, without moving it.
    pub fn peek(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        for ((d, xi), ci) in self.diff.iter_mut().zip(x).zip(&self.center) {
            *d = xi - ci;
        }
        matvec_into(&self.hessian, &self.diff, grad);
        0.5 * self.diff.iter().zip(grad.iter()).map(|(a, b)| a * b).sum::<f64>()
    }
}

fn symmetrize(h: &mut DMatrix<f64>) {
    let n = h.nrows();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = avg;
            h[(j, i)] = avg;
        }
    }
}

impl Task for NoisyQuadraticBowl {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.center.len()]
    }

    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        if !self.frozen {
            let s = draw_offset(&mut self.rng, self.center.len(), self.noise_sd.as_deref());
            self.center.iter_mut().zip(&s).for_each(|(c, si)| *c += si);
        }
        self.peek(x, grad)
    }

    fn hessian(&self) -> Option<&DMatrix<f64>> {
        Some(&self.hessian)
    }
}
