//! Text checkpoint format for preconditioners.
//!
//! ```text
//! LODO-PRECONDITIONER v1
//! variant full
//! n 100
//! alpha0 0.27
//! seed 5
//! block_size 4
//! perm 17 3 0 …        one line per layer (full and residual only)
//! params 0.12 -0.5 …   flat parameter vector
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a restore is
//! bit-exact. Unknown keys are rejected.

use nalgebra::DMatrix;

use super::{GNetwork, Preconditioner, ResidualNetwork, Variant};
use crate::error::{LodoError, Result};

pub const CHECKPOINT_MAGIC: &str = "LODO-PRECONDITIONER v1";

fn join<T: std::fmt::Debug>(xs: &[T]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

fn bad(msg: impl Into<String>) -> LodoError {
    LodoError::Checkpoint(msg.into())
}

fn parse_one<T: std::str::FromStr>(key: &str, val: Option<&str>) -> Result<T> {
    val.ok_or_else(|| bad(format!("missing `{key}`")))?
        .trim()
        .parse()
        .map_err(|_| bad(format!("bad value for `{key}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad entry in `{key}`"))))
        .collect()
}

impl Preconditioner {
    pub fn to_checkpoint(&self) -> String {
        let mut out = format!("{CHECKPOINT_MAGIC}\nvariant {}\nn {}\nalpha0 {:?}\n", self.variant().name(), self.dim(), self.alpha0());
        match self {
            Self::Full(net) => {
                out += &format!("seed {}\nblock_size {}\n", net.seed(), net.block_size());
                for p in net.perms() {
                    out += &format!("perm {}\n", join(p));
                }
            }
            Self::Residual(net) => {
                out += &format!("seed {}\n", net.seed());
                for p in net.perms() {
                    out += &format!("perm {}\n", join(p));
                }
            }
            _ => {}
        }
        out += &format!("params {}\n", join(self.params()));
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CHECKPOINT_MAGIC) {
            return Err(bad("missing magic header"));
        }
        let mut variant = None;
        let mut n = None;
        let mut alpha0 = None;
        let mut seed = None;
        let mut block_size = None;
        let mut perms = Vec::new();
        let mut params = None;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "variant" => variant = Some(rest.trim().parse::<Variant>()?),
                "n" => n = Some(parse_one::<usize>(key, Some(rest))?),
                "alpha0" => alpha0 = Some(parse_one::<f64>(key, Some(rest))?),
                "seed" => seed = Some(parse_one::<u64>(key, Some(rest))?),
                "block_size" => block_size = Some(parse_one::<usize>(key, Some(rest))?),
                "perm" => perms.push(parse_list::<usize>(key, rest)?),
                "params" => params = Some(parse_list::<f64>(key, rest)?),
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let variant = variant.ok_or_else(|| bad("missing `variant`"))?;
        let n = n.ok_or_else(|| bad("missing `n`"))?;
        let alpha0 = alpha0.ok_or_else(|| bad("missing `alpha0`"))?;
        let params = params.ok_or_else(|| bad("missing `params`"))?;
        let p = match variant {
            Variant::Full => {
                let k = block_size.ok_or_else(|| bad("missing `block_size`"))?;
                let seed = seed.ok_or_else(|| bad("missing `seed`"))?;
                Self::Full(GNetwork::from_parts(n, k, alpha0, seed, perms, params)?)
            }
            Variant::Residual => {
                let seed = seed.ok_or_else(|| bad("missing `seed`"))?;
                Self::Residual(ResidualNetwork::from_parts(n, alpha0, seed, perms, params)?)
            }
            Variant::Diagonal => {
                if params.len() != n {
                    return Err(bad("diagonal parameter count differs from n"));
                }
                Self::Diagonal { alpha0, theta: params }
            }
            Variant::Global => {
                if params.len() != 1 {
                    return Err(bad("global variant has exactly one parameter"));
                }
                Self::Global {
                    alpha0,
                    n,
                    theta: params[0],
                }
            }
            Variant::Dense => {
                if params.len() != n * n {
                    return Err(bad("dense parameter count differs from n*n"));
                }
                Self::Dense {
                    alpha0,
                    matrix: DMatrix::from_vec(n, n, params),
                }
            }
        };
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmat::GNetConfig;

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = GNetConfig::new(9).block_size(2).depth(3).alpha0(0.3).seed(77);
        for v in [Variant::Full, Variant::Diagonal, Variant::Global, Variant::Residual, Variant::Dense] {
            let mut p = Preconditioner::build(v, &cfg).unwrap();
            for (i, x) in p.params_mut().iter_mut().enumerate() {
                *x += (i as f64 * 0.37).sin() / 3.0;
            }
            let text = p.to_checkpoint();
            assert!(text.starts_with(CHECKPOINT_MAGIC));
            let back = Preconditioner::from_checkpoint(&text).unwrap();
            assert_eq!(back, p, "{v:?}");
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let p = Preconditioner::full(&GNetConfig::new(3).block_size(2).depth(2)).unwrap();
        let text = p.to_checkpoint();
        assert!(Preconditioner::from_checkpoint(&text.replacen("v1", "v0", 1)).is_err());
        assert!(Preconditioner::from_checkpoint(&text.replace("block_size 2\n", "")).is_err());
        assert!(Preconditioner::from_checkpoint(&format!("{text}colour blue\n")).is_err());
        let truncated: String = text.lines().filter(|l| !l.starts_with("perm")).map(|l| format!("{l}\n")).collect();
        assert!(Preconditioner::from_checkpoint(&truncated).is_err());
    }
}
