//! Entropy and reachability of random compositions of optional
//! transpositions.
//!
//! A sequence is built from blocks of `ñ/2` disjoint transpositions (a uniform
//! perfect matching of `ñ` elements). Each transposition is kept or replaced by
//! the identity with probability ½. Composing the first `M` blocks gives a
//! random permutation whose distribution, for a fixed sequence, is computed
//! exactly: each optional transposition `τ` maps a distribution `p` to
//! `½ p + ½ p∘τ`, which is exactly the effect of summing over both mask values.

use std::collections::HashMap;

use rand::seq::SliceRandom;

use crate::error::{LodoError, Result};
use crate::rng::{stream, Rng};
use crate::stats::{mean, std_dev};

/// Largest `ñ` whose symmetric group is tabulated.
pub const MAX_ENUMERABLE: usize = 6;

/// All permutations of `n` elements with a transposition action table.
#[derive(Debug, Clone)]
pub struct PermutationTable {
    n: usize,
    perms: Vec<Vec<u8>>,
    /// `swap[i * pairs + pair_index(a, b)]` = index of `perms[i]` with the
    /// entries at positions `a` and `b` exchanged.
    swap: Vec<usize>,
    pairs: usize,
}

fn check_size(n_tilde: usize) -> Result<()> {
    if n_tilde < 2 || n_tilde % 2 != 0 {
        return Err(LodoError::InvalidArgument(format!("ñ must be even and >= 2, got {n_tilde}")));
    }
    if n_tilde > MAX_ENUMERABLE {
        return Err(LodoError::TooLarge {
            n: n_tilde,
            limit: MAX_ENUMERABLE,
        });
    }
    Ok(())
}

fn all_perms(n: usize) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i as u8);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

impl PermutationTable {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ENUMERABLE {
            return Err(LodoError::TooLarge { n, limit: MAX_ENUMERABLE });
        }
        let perms = all_perms(n);
        let index: HashMap<&[u8], usize> = perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        let pairs = n * (n - 1) / 2;
        let mut swap = vec![0; perms.len() * pairs];
        for (i, p) in perms.iter().enumerate() {
            let mut q = p.clone();
            for a in 0..n {
                for b in a + 1..n {
                    q.swap(a, b);
                    swap[i * pairs + Self::pair_index_for(n, a, b)] = index[q.as_slice()];
                    q.swap(a, b);
                }
            }
        }
        Ok(Self { n, perms, swap, pairs })
    }

    fn pair_index_for(n: usize, a: usize, b: usize) -> usize {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        a * (2 * n - a - 1) / 2 + (b - a - 1)
    }

    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        Self::pair_index_for(self.n, a, b)
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn perm(&self, i: usize) -> &[u8] {
        &self.perms[i]
    }

    pub fn swapped(&self, i: usize, pair: usize) -> usize {
        self.swap[i * self.pairs + pair]
    }

    /// Apply one optional transposition to a distribution over permutations.
    pub fn mix(&self, p: &[f64], pair: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = 0.5 * (p[i] + p[self.swapped(i, pair)]);
        }
    }

    /// Extend a reachable set by one optional transposition.
    pub fn close(&self, reach: &mut [bool], pair: usize) {
        let snapshot: Vec<usize> = (0..reach.len()).filter(|&i| reach[i]).collect();
        for i in snapshot {
            reach[self.swapped(i, pair)] = true;
        }
    }

    /// `KL(p ‖ uniform) = Σ p ln(p · ñ!)`, clamped at zero.
    pub fn kl_from_uniform(&self, p: &[f64]) -> f64 {
        let size = self.len() as f64;
        p.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x * (x * size).ln())
            .sum::<f64>()
            .max(0.0)
    }

    pub fn log_size(&self) -> f64 {
        (2..=self.n).map(|i| (i as f64).ln()).sum()
    }
}

/// A uniformly random perfect matching, as pair indices.
fn random_matching(table: &PermutationTable, rng: &mut Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..table.n).collect();
    idx.shuffle(rng);
    idx.chunks_exact(2).map(|c| table.pair_index(c[0], c[1])).collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EntropyEstimate {
    pub n_tilde: usize,
    /// Number of matching blocks composed.
    pub m: usize,
    pub trials: usize,
    /// `ln ñ! − E[entropy]`.
    pub epsilon_hat: f64,
    pub std_err: f64,
}

/// Entropy deficit for several block counts at once. All counts share the
/// same random sequences (each is a prefix of the longest), so the deficit of
/// every single trial is non-increasing in `m`.
pub fn estimate_entropy_curve(n_tilde: usize, ms: &[usize], trials: usize, seed: u64) -> Result<Vec<EntropyEstimate>> {
    check_size(n_tilde)?;
    if trials == 0 {
        return Err(LodoError::InvalidArgument("need at least one trial".into()));
    }
    if ms.iter().any(|&m| m == 0) {
        return Err(LodoError::InvalidArgument("block count M must be >= 1".into()));
    }
    let table = PermutationTable::new(n_tilde)?;
    let max_m = ms.iter().copied().max().unwrap_or(0);
    // per_m[j][trial]
    let mut per_m = vec![Vec::with_capacity(trials); ms.len()];
    let mut p = vec![0.0; table.len()];
    let mut q = vec![0.0; table.len()];
    for trial in 0..trials {
        let mut rng = stream(seed, &[trial as u64]);
        p.fill(0.0);
        p[table.identity()] = 1.0;
        for block in 1..=max_m {
            for pair in random_matching(&table, &mut rng) {
                table.mix(&p, pair, &mut q);
                std::mem::swap(&mut p, &mut q);
            }
            for (j, &m) in ms.iter().enumerate() {
                if m == block {
                    per_m[j].push(table.kl_from_uniform(&p));
                }
            }
        }
    }
    Ok(ms
        .iter()
        .zip(per_m)
        .map(|(&m, eps)| EntropyEstimate {
            n_tilde,
            m,
            trials,
            epsilon_hat: mean(&eps),
            std_err: std_dev(&eps) / (trials as f64).sqrt(),
        })
        .collect())
}

pub fn estimate_permutation_entropy(n_tilde: usize, m: usize, trials: usize, seed: u64) -> Result<EntropyEstimate> {
    Ok(estimate_entropy_curve(n_tilde, &[m], trials, seed)?.remove(0))
}

/// Fraction of the `ñ!` permutations reachable by some keep/skip choice over
/// `n_blocks` random matchings, for one random sequence.
pub fn reachable_fraction_for_seed(n_tilde: usize, n_blocks: usize, seed: u64) -> Result<f64> {
    check_size(n_tilde)?;
    let table = PermutationTable::new(n_tilde)?;
    Ok(reachable_fraction(&table, n_blocks, &mut stream(seed, &[0x7265_6163])))
}

fn reachable_fraction(table: &PermutationTable, n_blocks: usize, rng: &mut Rng) -> f64 {
    let mut reach = vec![false; table.len()];
    reach[table.identity()] = true;
    for _ in 0..n_blocks {
        for pair in random_matching(table, rng) {
            table.close(&mut reach, pair);
        }
    }
    reach.iter().filter(|&&r| r).count() as f64 / table.len() as f64
}

/// Per-sequence reachable fractions averaged over `seed_count` sequences.
pub fn reachability_fraction(n_tilde: usize, n_blocks: usize, seed_count: usize, seed: u64) -> Result<f64> {
    if seed_count == 0 {
        return Err(LodoError::InvalidArgument("need at least one seed".into()));
    }
    let fractions = (0..seed_count)
        .map(|s| reachable_fraction_for_seed(n_tilde, n_blocks, crate::rng::derive_seed(seed, &[s as u64])))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&fractions))
}
