//! Residual variant: `G = alpha0 · Eᵀ G̃ᵀ D G̃ E` with
//! `G̃ = (I + w₁P₁)(I + w₂P₂)…(I + w_N P_N)` and a learned diagonal `D`.
//!
//! Parameters are laid out as `[w_1 … w_N, d_1 … d_ñ]`. With every `w_i = 0`
//! and `D = I` the operator is exactly `alpha0 · I`.

use crate::error::{check_dim, LodoError, Result};
use crate::rng::stream;

use super::full::{default_n_tilde, permute, permute_t, sample_perms, validate_perm};

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualNetwork {
    n: usize,
    n_tilde: usize,
    alpha0: f64,
    seed: u64,
    perms: Vec<Vec<usize>>,
    params: Vec<f64>,
}

impl ResidualNetwork {
    pub fn build(n: usize, block_size: usize, depth: usize, alpha0: f64, seed: u64) -> Result<Self> {
        if n == 0 || depth == 0 || block_size < 2 {
            return Err(LodoError::InvalidArgument(
                "residual network needs n >= 1, depth >= 1, block size >= 2".into(),
            ));
        }
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(LodoError::InvalidArgument(format!(
                "alpha0 must be positive, got {alpha0}"
            )));
        }
        let n_tilde = default_n_tilde(n, block_size);
        let mut rng = stream(seed, &[0x7265_7369]);
        let perms = sample_perms(&mut rng, depth, n_tilde);
        let mut params = vec![0.0; depth];
        params.extend(std::iter::repeat_n(1.0, n_tilde));
        Ok(Self {
            n,
            n_tilde,
            alpha0,
            seed,
            perms,
            params,
        })
    }

    pub fn from_parts(n: usize, alpha0: f64, seed: u64, perms: Vec<Vec<usize>>, params: Vec<f64>) -> Result<Self> {
        let depth = perms.len();
        let n_tilde = perms.first().map_or(0, Vec::len);
        if depth == 0 || n_tilde < n {
            return Err(LodoError::InvalidArgument("inconsistent residual shape".into()));
        }
        for p in &perms {
            check_dim(n_tilde, p.len())?;
            validate_perm(p)?;
        }
        check_dim(depth + n_tilde, params.len())?;
        Ok(Self {
            n,
            n_tilde,
            alpha0,
            seed,
            perms,
            params,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_tilde(&self) -> usize {
        self.n_tilde
    }

    pub fn depth(&self) -> usize {
        self.perms.len()
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn weights(&self) -> &[f64] {
        &self.params[..self.depth()]
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.params[self.depth()..]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Number of negative middle-diagonal entries; nonzero means the operator
    /// may have left the PSD cone.
    pub fn psd_violations(&self) -> usize {
        self.diagonal().iter().filter(|&&d| d < 0.0).count()
    }

    /// `z ← G̃ z`, recording the input of every residual layer.
    fn forward(&self, z: &mut [f64], tmp: &mut [f64], mut record: Option<&mut Vec<f64>>) {
        for i in (0..self.depth()).rev() {
            if let Some(rec) = record.as_deref_mut() {
                rec.extend_from_slice(z);
            }
            let w = self.params[i];
            permute(&self.perms[i], z, tmp);
            z.iter_mut().zip(tmp.iter()).for_each(|(a, b)| *a += w * b);
        }
    }

    /// `z ← G̃ᵀ z`.
    fn forward_t(&self, z: &mut [f64], tmp: &mut [f64], mut record: Option<&mut Vec<f64>>) {
        for i in 0..self.depth() {
            if let Some(rec) = record.as_deref_mut() {
                rec.extend_from_slice(z);
            }
            let w = self.params[i];
            permute_t(&self.perms[i], z, tmp);
            z.iter_mut().zip(tmp.iter()).for_each(|(a, b)| *a += w * b);
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, v.len())?;
        let mut z = vec![0.0; self.n_tilde];
        z[..self.n].copy_from_slice(v);
        let mut tmp = vec![0.0; self.n_tilde];
        self.forward(&mut z, &mut tmp, None);
        z.iter_mut().zip(self.diagonal()).for_each(|(a, d)| *a *= d);
        self.forward_t(&mut z, &mut tmp, None);
        z.truncate(self.n);
        z.iter_mut().for_each(|x| *x *= self.alpha0);
        Ok(z)
    }

    pub fn hypergrad(&self, m: &[f64], g_next: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, m.len())?;
        check_dim(self.n, g_next.len())?;
        let (w, depth) = (self.n_tilde, self.depth());
        let mut grad = vec![0.0; self.params.len()];

        let mut z = vec![0.0; w];
        z[..self.n].copy_from_slice(m);
        let mut tmp = vec![0.0; w];
        let mut fwd_inputs = Vec::with_capacity(depth * w);
        let mut bwd_inputs = Vec::with_capacity(depth * w);
        self.forward(&mut z, &mut tmp, Some(&mut fwd_inputs));
        let mid_input = z.clone();
        z.iter_mut().zip(self.diagonal()).for_each(|(a, d)| *a *= d);
        self.forward_t(&mut z, &mut tmp, Some(&mut bwd_inputs));

        let mut u = vec![0.0; w];
        for (ui, &gi) in u.iter_mut().zip(g_next) {
            *ui = -self.alpha0 * gi;
        }

        // back through G̃ᵀ: y = z + w Pᵀ z
        for i in (0..depth).rev() {
            let input = &bwd_inputs[i * w..(i + 1) * w];
            permute_t(&self.perms[i], input, &mut tmp);
            grad[i] += u.iter().zip(&tmp).map(|(a, b)| a * b).sum::<f64>();
            permute(&self.perms[i], &u, &mut tmp);
            let wi = self.params[i];
            u.iter_mut().zip(&tmp).for_each(|(a, b)| *a += wi * b);
        }
        // middle diagonal
        for j in 0..w {
            grad[depth + j] += u[j] * mid_input[j];
            u[j] *= self.params[depth + j];
        }
        // back through G̃: y = z + w P z, inputs recorded for i = depth-1..=0
        for i in 0..depth {
            let slot = depth - 1 - i;
            let input = &fwd_inputs[slot * w..(slot + 1) * w];
            permute(&self.perms[i], input, &mut tmp);
            grad[i] += u.iter().zip(&tmp).map(|(a, b)| a * b).sum::<f64>();
            permute_t(&self.perms[i], &u, &mut tmp);
            let wi = self.params[i];
            u.iter_mut().zip(&tmp).for_each(|(a, b)| *a += wi * b);
        }
        Ok(grad)
    }
}
