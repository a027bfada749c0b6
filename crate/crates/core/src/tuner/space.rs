//! Rescaled hyperparameter coordinates.
//!
//! Learning rates map through `ln x`, decay rates through `1 − ln(1 − x)`,
//! anything else is left alone. The tuner mutates in these coordinates.

use crate::error::{LodoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperKind {
    LearningRate,
    Decay,
    Plain,
}

/// Largest decay that unrescaling can produce; keeps decays strictly below 1.
pub const MAX_DECAY: f64 = 1.0 - 1e-12;

pub fn rescale_value(kind: HyperKind, x: f64) -> Result<f64> {
    match kind {
        HyperKind::LearningRate if x > 0.0 && x.is_finite() => Ok(x.ln()),
        HyperKind::LearningRate => Err(LodoError::Domain(format!("learning rate must be > 0, got {x}"))),
        HyperKind::Decay if (0.0..1.0).contains(&x) => Ok(1.0 - (-x).ln_1p()),
        HyperKind::Decay => Err(LodoError::Domain(format!("decay must lie in [0, 1), got {x}"))),
        HyperKind::Plain if x.is_finite() => Ok(x),
        HyperKind::Plain => Err(LodoError::Domain(format!("value must be finite, got {x}"))),
    }
}

/// Inverse of [`rescale_value`]. Rescaled decays below 1 would map to
/// negative decays; they are clamped to 0 and reported through the flag.
pub fn unrescale_value(kind: HyperKind, y: f64) -> (f64, bool) {
    match kind {
        HyperKind::LearningRate => (y.exp(), false),
        HyperKind::Decay => {
            let x = -(1.0 - y).exp_m1();
            if x < 0.0 {
                (0.0, true)
            } else if x > MAX_DECAY {
                (MAX_DECAY, true)
            } else {
                (x, false)
            }
        }
        HyperKind::Plain => (y, false),
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HyperParam {
    pub name: String,
    pub kind: HyperKind,
}

impl HyperParam {
    pub fn new(name: &str, kind: HyperKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HyperSpace {
    pub params: Vec<HyperParam>,
}

impl HyperSpace {
    pub fn new(params: Vec<HyperParam>) -> Self {
        Self { params }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn rescale(&self, raw: &[f64]) -> Result<Vec<f64>> {
        crate::error::check_dim(self.len(), raw.len())?;
        self.params.iter().zip(raw).map(|(p, &x)| rescale_value(p.kind, x)).collect()
    }

    /// Raw values plus the number of coordinates that had to be clamped.
    pub fn unrescale(&self, rescaled: &[f64]) -> Result<(Vec<f64>, usize)> {
        crate::error::check_dim(self.len(), rescaled.len())?;
        let mut clamped = 0;
        let raw = self
            .params
            .iter()
            .zip(rescaled)
            .map(|(p, &y)| {
                let (x, c) = unrescale_value(p.kind, y);
                if c {
                    log::debug!("clamped {} from rescaled value {y} to {x}", p.name);
                    clamped += 1;
                }
                x
            })
            .collect();
        Ok((raw, clamped))
    }
}
