//! Small dense helpers shared by the preconditioners, tasks and diagnostics.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Sample an `n x n` orthogonal matrix from the Haar measure.
///
/// QR of a standard normal matrix, with the columns of `Q` multiplied by the
/// sign of the matching diagonal entry of `R` so the factorization is unique.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let gauss = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Standard normal vector.
pub fn normal_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform random unit vector.
pub fn unit_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v = normal_vec(n, rng);
        let norm = norm2(&v);
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `out = M v` for a dense matrix.
pub fn matvec_into(m: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.ncols(), v.len());
    debug_assert_eq!(m.nrows(), out.len());
    out.iter_mut().for_each(|o| *o = 0.0);
    // column-major storage: accumulate column by column
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        let col = m.column(j);
        for (o, &mij) in out.iter_mut().zip(col.iter()) {
            *o += mij * vj;
        }
    }
}

pub fn matvec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    matvec_into(m, v, &mut out);
    out
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn haar_is_orthogonal() {
        let mut rng = rng_from_seed(3);
        for n in [1, 2, 4, 17] {
            let q = haar_orthogonal(n, &mut rng);
            let err = (q.transpose() * &q - DMatrix::identity(n, n)).abs().max();
            assert!(err < 1e-12, "n={n} err={err}");
        }
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut rng = rng_from_seed(4);
        for _ in 0..10 {
            let v = unit_vec(9, &mut rng);
            assert!((norm2(&v) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn matvec_matches_nalgebra() {
        let mut rng = rng_from_seed(5);
        let m = DMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 - 2.5);
        let v = normal_vec(3, &mut rng);
        let ours = matvec(&m, &v);
        let theirs = &m * nalgebra::DVector::from_column_slice(&v);
        for i in 0..4 {
            assert!((ours[i] - theirs[i]).abs() < 1e-14);
        }
    }
}
