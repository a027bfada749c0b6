//! Learnable inverse-Hessian operators.
//!
//! [`Preconditioner`] wraps the full LODO network and its ablations behind one
//! interface: apply the operator to a vector, and differentiate the next loss
//! `g_nextᵀ(−G m)` with respect to the operator's own parameters.

mod checkpoint;
mod full;
mod residual;

use nalgebra::DMatrix;

use crate::error::{check_dim, LodoError, Result};

pub use checkpoint::CHECKPOINT_MAGIC;
pub use full::{default_n_tilde, GNetConfig, GNetwork, DEFAULT_BLOCK_SIZE, DEFAULT_DEPTH};
pub use residual::ResidualNetwork;

/// Largest `n` for which [`Preconditioner::materialize_dense`] is allowed.
pub const MATERIALIZE_LIMIT: usize = 64;

/// Which parameterization a preconditioner uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Full,
    Diagonal,
    Global,
    Residual,
    Dense,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Diagonal => "diagonal",
            Variant::Global => "global",
            Variant::Residual => "residual",
            Variant::Dense => "dense",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = LodoError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "full" => Variant::Full,
            "diagonal" => Variant::Diagonal,
            "global" => Variant::Global,
            "residual" => Variant::Residual,
            "dense" => Variant::Dense,
            other => return Err(LodoError::InvalidArgument(format!("unknown variant `{other}`"))),
        })
    }
}

/// Gradient of the post-step loss with respect to a preconditioner's
/// parameters, laid out like [`Preconditioner::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGradient(pub Vec<f64>);

impl ThetaGradient {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// A learnable operator `G(θ, alpha0)`.
///
/// `Dense` holds an unconstrained `n x n` matrix `M` with `G = alpha0·M`. It is
/// the parameterization of the simplified dynamics analysis and is not
/// guaranteed to stay symmetric once trained; all other variants are
/// symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Preconditioner {
    Full(GNetwork),
    Diagonal { alpha0: f64, theta: Vec<f64> },
    Global { alpha0: f64, n: usize, theta: f64 },
    Residual(ResidualNetwork),
    Dense { alpha0: f64, matrix: DMatrix<f64> },
}

fn check_alpha0(alpha0: f64) -> Result<()> {
    if alpha0 > 0.0 && alpha0.is_finite() {
        Ok(())
    } else {
        Err(LodoError::InvalidArgument(format!("alpha0 must be positive, got {alpha0}")))
    }
}

impl Preconditioner {
    pub fn full(cfg: &GNetConfig) -> Result<Self> {
        GNetwork::build(cfg).map(Self::Full)
    }

    pub fn diagonal(n: usize, alpha0: f64) -> Result<Self> {
        check_alpha0(alpha0)?;
        if n == 0 {
            return Err(LodoError::InvalidArgument("n must be at least 1".into()));
        }
        Ok(Self::Diagonal {
            alpha0,
            theta: vec![1.0; n],
        })
    }

    pub fn global(n: usize, alpha0: f64) -> Result<Self> {
        check_alpha0(alpha0)?;
        if n == 0 {
            return Err(LodoError::InvalidArgument("n must be at least 1".into()));
        }
        Ok(Self::Global { alpha0, n, theta: 1.0 })
    }

    pub fn residual(n: usize, block_size: usize, depth: usize, alpha0: f64, seed: u64) -> Result<Self> {
        ResidualNetwork::build(n, block_size, depth, alpha0, seed).map(Self::Residual)
    }

    /// Dense operator `alpha0 · M`.
    pub fn dense(alpha0: f64, matrix: DMatrix<f64>) -> Result<Self> {
        check_alpha0(alpha0)?;
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(LodoError::InvalidArgument("dense operator must be square".into()));
        }
        Ok(Self::Dense { alpha0, matrix })
    }

    /// Build any variant at its identity initialization.
    pub fn build(variant: Variant, cfg: &GNetConfig) -> Result<Self> {
        match variant {
            Variant::Full => Self::full(cfg),
            Variant::Diagonal => Self::diagonal(cfg.n, cfg.alpha0),
            Variant::Global => Self::global(cfg.n, cfg.alpha0),
            Variant::Residual => Self::residual(cfg.n, cfg.block_size, cfg.depth, cfg.alpha0, cfg.seed),
            Variant::Dense => Self::dense(cfg.alpha0, DMatrix::identity(cfg.n, cfg.n)),
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            Self::Full(_) => Variant::Full,
            Self::Diagonal { .. } => Variant::Diagonal,
            Self::Global { .. } => Variant::Global,
            Self::Residual(_) => Variant::Residual,
            Self::Dense { .. } => Variant::Dense,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Full(net) => net.n(),
            Self::Diagonal { theta, .. } => theta.len(),
            Self::Global { n, .. } => *n,
            Self::Residual(net) => net.n(),
            Self::Dense { matrix, .. } => matrix.nrows(),
        }
    }

    pub fn alpha0(&self) -> f64 {
        match self {
            Self::Full(net) => net.alpha0(),
            Self::Residual(net) => net.alpha0(),
            Self::Diagonal { alpha0, .. } | Self::Global { alpha0, .. } | Self::Dense { alpha0, .. } => *alpha0,
        }
    }

    /// Learnable parameters as one flat slice.
    pub fn params(&self) -> &[f64] {
        match self {
            Self::Full(net) => net.params(),
            Self::Diagonal { theta, .. } => theta,
            Self::Global { theta, .. } => std::slice::from_ref(theta),
            Self::Residual(net) => net.params(),
            Self::Dense { matrix, .. } => matrix.as_slice(),
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            Self::Full(net) => net.params_mut(),
            Self::Diagonal { theta, .. } => theta,
            Self::Global { theta, .. } => std::slice::from_mut(theta),
            Self::Residual(net) => net.params_mut(),
            Self::Dense { matrix, .. } => matrix.as_mut_slice(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.params().len()
    }

    /// `G v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), v.len())?;
        match self {
            Self::Full(net) => net.apply(v),
            Self::Residual(net) => net.apply(v),
            Self::Diagonal { alpha0, theta } => {
                Ok(theta.iter().zip(v).map(|(t, x)| alpha0 * t * x).collect())
            }
            Self::Global { alpha0, theta, .. } => Ok(v.iter().map(|x| alpha0 * theta * x).collect()),
            Self::Dense { alpha0, matrix } => {
                let mut out = crate::linalg::matvec(matrix, v);
                out.iter_mut().for_each(|x| *x *= alpha0);
                Ok(out)
            }
        }
    }

    /// `∇_θ [g_nextᵀ(−G(θ) m)]`, treating `m` and `g_next` as constants.
    pub fn hypergrad(&self, m: &[f64], g_next: &[f64]) -> Result<ThetaGradient> {
        let n = self.dim();
        check_dim(n, m.len())?;
        check_dim(n, g_next.len())?;
        let grad = match self {
            Self::Full(net) => net.hypergrad(m, g_next)?,
            Self::Residual(net) => net.hypergrad(m, g_next)?,
            Self::Diagonal { alpha0, .. } => m.iter().zip(g_next).map(|(a, b)| -alpha0 * a * b).collect(),
            Self::Global { alpha0, .. } => {
                vec![-alpha0 * crate::linalg::dot(m, g_next)]
            }
            Self::Dense { alpha0, .. } => {
                // column-major: entry (i, j) = −alpha0 g_i m_j
                let mut out = Vec::with_capacity(n * n);
                for &mj in m {
                    out.extend(g_next.iter().map(|gi| -alpha0 * gi * mj));
                }
                out
            }
        };
        Ok(ThetaGradient(grad))
    }

    /// Explicit `n x n` matrix of the operator, built by applying it to every
    /// basis vector.
    pub fn materialize_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > MATERIALIZE_LIMIT {
            return Err(LodoError::TooLarge {
                n,
                limit: MATERIALIZE_LIMIT,
            });
        }
        let mut out = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e)?;
            out.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        Ok(out)
    }

    /// Negative diagonal entries of a residual network's middle factor.
    /// Always zero for the other variants.
    pub fn psd_violations(&self) -> usize {
        match self {
            Self::Residual(net) => net.psd_violations(),
            _ => 0,
        }
    }
}
