use crate::error::{LodoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Generation {
    pub noise_stddev: f64,
    pub steps: usize,
}

/// Per-generation mutation noise and run length.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Schedule {
    pub generations: Vec<Generation>,
}

const NOISE_BOWL: [f64; 10] = [3.0, 3.0, 3.0, 3.0, 2.0, 1.7, 1.4, 1.2, 0.9, 0.6];
const STEPS_BOWL: [usize; 10] = [1000, 1000, 1000, 1000, 1500, 1500, 2000, 3000, 5000, 8000];
const NOISE_ROSENBROCK: [f64; 10] = [3.0, 3.0, 3.0, 2.5, 2.0, 1.5, 1.0, 0.75, 0.5, 0.3];

impl Schedule {
    pub fn new(generations: Vec<Generation>) -> Result<Self> {
        if generations.is_empty() {
            return Err(LodoError::InvalidArgument("schedule needs at least one generation".into()));
        }
        for g in &generations {
            if !(g.noise_stddev >= 0.0 && g.noise_stddev.is_finite()) || g.steps == 0 {
                return Err(LodoError::InvalidArgument(format!("bad schedule entry {g:?}")));
            }
        }
        Ok(Self { generations })
    }

    pub fn from_pairs(pairs: &[(f64, usize)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(noise_stddev, steps)| Generation { noise_stddev, steps })
                .collect(),
        )
    }

    fn zip(noise: &[f64], steps: &[usize]) -> Self {
        Self {
            generations: noise
                .iter()
                .zip(steps)
                .map(|(&noise_stddev, &steps)| Generation { noise_stddev, steps })
                .collect(),
        }
    }

    /// Noisy quadratic bowl schedule.
    pub fn bowl() -> Self {
        Self::zip(&NOISE_BOWL, &STEPS_BOWL)
    }

    /// Rosenbrock schedule: 200 steps every generation.
    pub fn rosenbrock() -> Self {
        Self::zip(&NOISE_ROSENBROCK, &[200; 10])
    }

    /// Image-generation schedule (same numbers as the bowl).
    pub fn image() -> Self {
        Self::bowl()
    }

    pub fn len(&self) -> usize {
        self.generations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generations.is_empty()
    }

    /// Same schedule with every noise level set to zero.
    pub fn without_noise(&self) -> Self {
        Self {
            generations: self
                .generations
                .iter()
                .map(|g| Generation {
                    noise_stddev: 0.0,
                    steps: g.steps,
                })
                .collect(),
        }
    }
}
