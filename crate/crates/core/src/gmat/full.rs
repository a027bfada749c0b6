//! The deep permutation/block-diagonal network.
//!
//! `G = alpha0 · Eᵀ G̃ᵀ G̃ E` with `G̃ = B₁P₁ B₂P₂ … B_N P_N`, where `E` zero-pads
//! `n → ñ`, every `P_i` is a fixed random permutation of `ñ` indices and every
//! `B_i` is block diagonal with `ñ/k` dense `k x k` blocks. Applying `G̃` to a
//! vector applies `P_N` first and `B₁` last.

use rand::seq::SliceRandom;

use crate::error::{check_dim, LodoError, Result};
use crate::linalg::haar_orthogonal;
use crate::rng::{stream, Rng};

pub const DEFAULT_BLOCK_SIZE: usize = 4;
pub const DEFAULT_DEPTH: usize = 16;

/// Construction parameters for [`GNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct GNetConfig {
    pub n: usize,
    pub block_size: usize,
    pub depth: usize,
    pub alpha0: f64,
    pub seed: u64,
    /// Overrides the default padded width `⌊2n/k⌋·k`.
    pub n_tilde: Option<usize>,
}

impl GNetConfig {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            block_size: DEFAULT_BLOCK_SIZE,
            depth: DEFAULT_DEPTH,
            alpha0: 1.0,
            seed: 0,
            n_tilde: None,
        }
    }

    pub fn block_size(mut self, k: usize) -> Self {
        self.block_size = k;
        self
    }

    pub fn depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn alpha0(mut self, alpha0: f64) -> Self {
        self.alpha0 = alpha0;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_tilde(mut self, n_tilde: usize) -> Self {
        self.n_tilde = Some(n_tilde);
        self
    }
}

/// Padded width `⌊2n/k⌋·k`, raised to `k` when that would fall below `n`
/// (only possible for `n < k`).
pub fn default_n_tilde(n: usize, k: usize) -> usize {
    let w = (2 * n / k) * k;
    if w < n {
        k
    } else {
        w
    }
}

/// Draw `depth` uniform permutations of `n_tilde` indices.
pub(crate) fn sample_perms(rng: &mut Rng, depth: usize, n_tilde: usize) -> Vec<Vec<usize>> {
    (0..depth)
        .map(|_| {
            let mut p: Vec<usize> = (0..n_tilde).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}

pub(crate) fn validate_perm(p: &[usize]) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &i in p {
        if i >= p.len() || std::mem::replace(&mut seen[i], true) {
            return Err(LodoError::InvalidArgument(
                "permutation is not a bijection".into(),
            ));
        }
    }
    Ok(())
}

/// `dst = P src`, i.e. `dst[j] = src[perm[j]]`.
#[inline]
pub(crate) fn permute(perm: &[usize], src: &[f64], dst: &mut [f64]) {
    for (d, &p) in dst.iter_mut().zip(perm) {
        *d = src[p];
    }
}

/// `dst = Pᵀ src`.
#[inline]
pub(crate) fn permute_t(perm: &[usize], src: &[f64], dst: &mut [f64]) {
    for (&s, &p) in src.iter().zip(perm) {
        dst[p] = s;
    }
}

/// Learnable LODO network. Blocks are stored layer-major, then block-major,
/// each block row-major; that flat vector is the parameter vector `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GNetwork {
    n: usize,
    k: usize,
    depth: usize,
    n_tilde: usize,
    alpha0: f64,
    seed: u64,
    perms: Vec<Vec<usize>>,
    blocks: Vec<f64>,
}

impl GNetwork {
    pub fn build(cfg: &GNetConfig) -> Result<Self> {
        let GNetConfig {
            n,
            block_size: k,
            depth,
            alpha0,
            seed,
            n_tilde,
        } = *cfg;
        if n == 0 {
            return Err(LodoError::InvalidArgument("n must be at least 1".into()));
        }
        if k < 2 {
            return Err(LodoError::InvalidArgument("block size must be at least 2".into()));
        }
        if depth == 0 {
            return Err(LodoError::InvalidArgument("depth must be at least 1".into()));
        }
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(LodoError::InvalidArgument(format!(
                "alpha0 must be positive, got {alpha0}"
            )));
        }
        let n_tilde = match n_tilde {
            Some(w) if w < n => {
                return Err(LodoError::InvalidArgument(format!(
                    "padded width {w} is smaller than n = {n}"
                )))
            }
            Some(w) if w % k != 0 => {
                return Err(LodoError::InvalidArgument(format!(
                    "padded width {w} is not a multiple of block size {k}"
                )))
            }
            Some(w) => w,
            None => default_n_tilde(n, k),
        };

        let mut rng = stream(seed, &[0x6e65_7477]);
        let perms = sample_perms(&mut rng, depth, n_tilde);
        let per_layer = n_tilde * k;
        let mut blocks = Vec::with_capacity(depth * per_layer);
        for _ in 0..depth * (n_tilde / k) {
            let q = haar_orthogonal(k, &mut rng);
            for r in 0..k {
                for c in 0..k {
                    blocks.push(q[(r, c)]);
                }
            }
        }
        Ok(Self {
            n,
            k,
            depth,
            n_tilde,
            alpha0,
            seed,
            perms,
            blocks,
        })
    }

    /// Reassemble a network from stored parts (checkpoint restore).
    pub fn from_parts(
        n: usize,
        k: usize,
        alpha0: f64,
        seed: u64,
        perms: Vec<Vec<usize>>,
        blocks: Vec<f64>,
    ) -> Result<Self> {
        let depth = perms.len();
        let n_tilde = perms.first().map_or(0, Vec::len);
        if depth == 0 || k < 2 || n_tilde < n || !n_tilde.is_multiple_of(k) {
            return Err(LodoError::InvalidArgument("inconsistent network shape".into()));
        }
        for p in &perms {
            check_dim(n_tilde, p.len())?;
            validate_perm(p)?;
        }
        check_dim(depth * n_tilde * k, blocks.len())?;
        Ok(Self {
            n,
            k,
            depth,
            n_tilde,
            alpha0,
            seed,
            perms,
            blocks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_tilde(&self) -> usize {
        self.n_tilde
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

    pub fn params(&self) -> &[f64] {
        &self.blocks
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.blocks
    }

    fn layer(&self, i: usize) -> &[f64] {
        let len = self.n_tilde * self.k;
        &self.blocks[i * len..(i + 1) * len]
    }

    /// The `k x k` block `b` of layer `i`, row-major.
    pub fn block(&self, i: usize, b: usize) -> &[f64] {
        let kk = self.k * self.k;
        &self.layer(i)[b * kk..(b + 1) * kk]
    }

    fn block_mul(&self, i: usize, src: &[f64], dst: &mut [f64]) {
        match self.k {
            2 => kernels::mul::<2>(self.layer(i), src, dst),
            4 => kernels::mul::<4>(self.layer(i), src, dst),
            k => kernels::mul_dyn(k, self.layer(i), src, dst),
        }
    }

    fn block_mul_t(&self, i: usize, src: &[f64], dst: &mut [f64]) {
        match self.k {
            2 => kernels::mul_t::<2>(self.layer(i), src, dst),
            4 => kernels::mul_t::<4>(self.layer(i), src, dst),
            k => kernels::mul_t_dyn(k, self.layer(i), src, dst),
        }
    }

    /// `G̃ z` in place. When `record` is given, the input of every block layer
    /// is appended to it.
    fn forward_tilde(&self, z: &mut Vec<f64>, tmp: &mut Vec<f64>, mut record: Option<&mut Vec<f64>>) {
        for i in (0..self.depth).rev() {
            permute(&self.perms[i], z, tmp);
            if let Some(rec) = record.as_deref_mut() {
                rec.extend_from_slice(tmp);
            }
            self.block_mul(i, tmp, z);
        }
    }

    /// `G̃ᵀ z` in place.
    fn forward_tilde_t(&self, z: &mut Vec<f64>, tmp: &mut Vec<f64>, mut record: Option<&mut Vec<f64>>) {
        for i in 0..self.depth {
            if let Some(rec) = record.as_deref_mut() {
                rec.extend_from_slice(z);
            }
            self.block_mul_t(i, z, tmp);
            permute_t(&self.perms[i], tmp, z);
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, v.len())?;
        let mut z = vec![0.0; self.n_tilde];
        z[..self.n].copy_from_slice(v);
        let mut tmp = vec![0.0; self.n_tilde];
        self.forward_tilde(&mut z, &mut tmp, None);
        self.forward_tilde_t(&mut z, &mut tmp, None);
        z.truncate(self.n);
        z.iter_mut().for_each(|x| *x *= self.alpha0);
        Ok(z)
    }

    /// Gradient of `g_nextᵀ(−G m)` with respect to every block entry.
    ///
    /// Reverse pass through the `2N` block layers of `G̃ᵀ G̃`; each block
    /// collects one contribution from `B_i` and one from `B_iᵀ`.
    pub fn hypergrad(&self, m: &[f64], g_next: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, m.len())?;
        check_dim(self.n, g_next.len())?;
        let (w, k, depth) = (self.n_tilde, self.k, self.depth);
        let mut grad = vec![0.0; self.blocks.len()];
        if m.iter().all(|&x| x == 0.0) || g_next.iter().all(|&x| x == 0.0) {
            return Ok(grad);
        }

        let mut z = vec![0.0; w];
        z[..self.n].copy_from_slice(m);
        let mut tmp = vec![0.0; w];
        let mut fwd_inputs = Vec::with_capacity(depth * w);
        let mut bwd_inputs = Vec::with_capacity(depth * w);
        self.forward_tilde(&mut z, &mut tmp, Some(&mut fwd_inputs));
        self.forward_tilde_t(&mut z, &mut tmp, Some(&mut bwd_inputs));

        // upstream gradient at the padded output: d(−α0 g̃ᵀ y)/dy
        let mut u = vec![0.0; w];
        for (ui, &gi) in u.iter_mut().zip(g_next) {
            *ui = -self.alpha0 * gi;
        }

        let per_layer = w * k;
        // back through G̃ᵀ: layers were applied for i = 0..depth as (B_iᵀ, P_iᵀ)
        for i in (0..depth).rev() {
            permute(&self.perms[i], &u, &mut tmp);
            // y = Bᵀ z  =>  dB[r][c] += z[r] u[c]
            let input = &bwd_inputs[i * w..(i + 1) * w];
            let g_layer = &mut grad[i * per_layer..(i + 1) * per_layer];
            kernels::outer_acc(k, g_layer, input, &tmp);
            self.block_mul(i, &tmp, &mut u);
        }
        // back through G̃: layers were applied for i = depth-1..=0 as (P_i, B_i)
        // and inputs were recorded in that order
        for i in 0..depth {
            let slot = depth - 1 - i;
            let input = &fwd_inputs[slot * w..(slot + 1) * w];
            let g_layer = &mut grad[i * per_layer..(i + 1) * per_layer];
            // y = B z  =>  dB[r][c] += u[r] z[c]
            kernels::outer_acc(k, g_layer, &u, input);
            self.block_mul_t(i, &u, &mut tmp);
            permute_t(&self.perms[i], &tmp, &mut u);
        }
        Ok(grad)
    }
}

/// Per-layer block kernels, with fixed-size fast paths for common `k`.
mod kernels {
    pub(super) fn mul<const K: usize>(layer: &[f64], src: &[f64], dst: &mut [f64]) {
        for ((blk, s), d) in layer
            .chunks_exact(K * K)
            .zip(src.chunks_exact(K))
            .zip(dst.chunks_exact_mut(K))
        {
            let s: &[f64; K] = s.try_into().unwrap();
            for r in 0..K {
                let row: &[f64; K] = blk[r * K..(r + 1) * K].try_into().unwrap();
                let mut acc = 0.0;
                for c in 0..K {
                    acc += row[c] * s[c];
                }
                d[r] = acc;
            }
        }
    }

    pub(super) fn mul_t<const K: usize>(layer: &[f64], src: &[f64], dst: &mut [f64]) {
        for ((blk, s), d) in layer
            .chunks_exact(K * K)
            .zip(src.chunks_exact(K))
            .zip(dst.chunks_exact_mut(K))
        {
            let mut out = [0.0; K];
            for r in 0..K {
                let row: &[f64; K] = blk[r * K..(r + 1) * K].try_into().unwrap();
                for c in 0..K {
                    out[c] += row[c] * s[r];
                }
            }
            d.copy_from_slice(&out);
        }
    }

    pub(super) fn mul_dyn(k: usize, layer: &[f64], src: &[f64], dst: &mut [f64]) {
        for ((blk, s), d) in layer
            .chunks_exact(k * k)
            .zip(src.chunks_exact(k))
            .zip(dst.chunks_exact_mut(k))
        {
            for (r, dr) in d.iter_mut().enumerate() {
                *dr = blk[r * k..(r + 1) * k].iter().zip(s).map(|(a, b)| a * b).sum();
            }
        }
    }

    pub(super) fn mul_t_dyn(k: usize, layer: &[f64], src: &[f64], dst: &mut [f64]) {
        for ((blk, s), d) in layer
            .chunks_exact(k * k)
            .zip(src.chunks_exact(k))
            .zip(dst.chunks_exact_mut(k))
        {
            d.iter_mut().for_each(|x| *x = 0.0);
            for (r, &sr) in s.iter().enumerate() {
                for (dc, &a) in d.iter_mut().zip(&blk[r * k..(r + 1) * k]) {
                    *dc += a * sr;
                }
            }
        }
    }

    /// `g_b += a_b b_bᵀ` for every block `b`.
    pub(super) fn outer_acc(k: usize, grad: &mut [f64], a: &[f64], b: &[f64]) {
        match k {
            2 => outer_acc_k::<2>(grad, a, b),
            4 => outer_acc_k::<4>(grad, a, b),
            _ => {
                for ((gb, ab), bb) in grad.chunks_exact_mut(k * k).zip(a.chunks_exact(k)).zip(b.chunks_exact(k)) {
                    for (r, &ar) in ab.iter().enumerate() {
                        for (g, &bc) in gb[r * k..(r + 1) * k].iter_mut().zip(bb) {
                            *g += ar * bc;
                        }
                    }
                }
            }
        }
    }

    fn outer_acc_k<const K: usize>(grad: &mut [f64], a: &[f64], b: &[f64]) {
        for ((gb, ab), bb) in grad.chunks_exact_mut(K * K).zip(a.chunks_exact(K)).zip(b.chunks_exact(K)) {
            let bb: &[f64; K] = bb.try_into().unwrap();
            for r in 0..K {
                let row: &mut [f64; K] = (&mut gb[r * K..(r + 1) * K]).try_into().unwrap();
                for c in 0..K {
                    row[c] += ab[r] * bb[c];
                }
            }
        }
    }
}
