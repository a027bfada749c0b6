//! Monte-Carlo estimate of the inverse-Hessian error `‖I − G H‖_F² / n`.

use nalgebra::DMatrix;

use crate::error::{check_dim, LodoError, Result};
use crate::gmat::Preconditioner;
use crate::linalg::{matvec, unit_vec};
use crate::rng::rng_from_seed;

/// `‖(I − G H) v‖²` for `probes` independent uniform unit vectors `v`.
pub fn sigma_squared_samples(p: &Preconditioner, h: &DMatrix<f64>, probes: usize, seed: u64) -> Result<Vec<f64>> {
    let n = p.dim();
    check_dim(n, h.nrows())?;
    check_dim(n, h.ncols())?;
    if probes == 0 {
        return Err(LodoError::InvalidArgument("need at least one probe".into()));
    }
    let mut rng = rng_from_seed(seed);
    (0..probes)
        .map(|_| {
            let v = unit_vec(n, &mut rng);
            let ghv = p.apply(&matvec(h, &v))?;
            Ok(v.iter().zip(&ghv).map(|(a, b)| (a - b) * (a - b)).sum())
        })
        .collect()
}

/// `σ̂ = sqrt(mean_i ‖(I − G H) v_i‖²)`.
pub fn estimate_sigma(p: &Preconditioner, h: &DMatrix<f64>, probes: usize, seed: u64) -> Result<f64> {
    let samples = sigma_squared_samples(p, h, probes, seed)?;
    Ok((samples.iter().sum::<f64>() / samples.len() as f64).sqrt())
}
