use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{HyperSpace, Schedule};
use crate::error::{LodoError, Result};
use crate::optimizers::{run, OptimizerSpec, RunOptions};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::tail_mean;
use crate::tasks::TaskSpec;

const MUTATION_STREAM: u64 = 11;
const EVAL_STREAM: u64 = 12;

/// Something the tuner can score: a search space, a starting point, and a
/// fitness (lower is better, `+∞` for diverged runs).
pub trait Family: Sync {
    fn space(&self) -> HyperSpace;
    fn defaults(&self) -> Vec<f64>;
    fn fitness(&self, raw: &[f64], steps: usize, seed: u64) -> Result<f64>;
}

/// An optimizer family tuned on one task by mean loss over the last tenth
/// of the run.
#[derive(Debug, Clone)]
pub struct OptimizerFamily {
    pub spec: OptimizerSpec,
    pub task: TaskSpec,
}

impl OptimizerFamily {
    pub fn new(spec: OptimizerSpec, task: TaskSpec) -> Self {
        Self { spec, task }
    }
}

impl Family for OptimizerFamily {
    fn space(&self) -> HyperSpace {
        self.spec.hyper_space()
    }

    fn defaults(&self) -> Vec<f64> {
        self.spec.hyper_values()
    }

    fn fitness(&self, raw: &[f64], steps: usize, seed: u64) -> Result<f64> {
        let spec = self.spec.with_hyperparameters(raw)?;
        if let Err(e) = spec.validate() {
            log::info!("scoring invalid individual as diverged: {e}");
            return Ok(f64::INFINITY);
        }
        let rec = run(&spec, &self.task, steps, seed, &RunOptions::default())?;
        if rec.diverged_at.is_some() {
            return Ok(f64::INFINITY);
        }
        Ok(tail_mean(&rec.losses, 0.1))
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Genome {
    pub rescaled: Vec<f64>,
    pub raw: Vec<f64>,
    pub seed: u64,
    /// `+∞` when the run diverged.
    pub fitness: f64,
}

impl Genome {
    pub fn diverged(&self) -> bool {
        !self.fitness.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub noise_stddev: f64,
    pub steps: usize,
    pub mean_rescaled: Vec<f64>,
    pub individuals: Vec<Genome>,
    pub survivors: Vec<usize>,
    pub next_mean_rescaled: Vec<f64>,
    pub next_mean_raw: Vec<f64>,
    pub all_diverged: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TuneResult {
    pub names: Vec<String>,
    pub best: Vec<f64>,
    pub best_rescaled: Vec<f64>,
    pub lineage: Vec<GenerationLog>,
}

/// Indices of the `keep` fittest individuals, best first. Ties and NaNs
/// resolve by index so the result depends only on the ordering.
pub fn select_survivors(fitness: &[f64], keep: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    let key = |f: f64| if f.is_nan() { f64::INFINITY } else { f };
    idx.sort_by(|&a, &b| key(fitness[a]).total_cmp(&key(fitness[b])).then(a.cmp(&b)));
    idx.truncate(keep);
    idx
}

/// Coordinate-wise mean of the chosen rows.
pub fn mean_of(rows: &[Vec<f64>], chosen: &[usize]) -> Vec<f64> {
    let d = rows.first().map_or(0, Vec::len);
    let mut out = vec![0.0; d];
    for &i in chosen {
        for (o, v) in out.iter_mut().zip(&rows[i]) {
            *o += v;
        }
    }
    let k = chosen.len() as f64;
    out.iter_mut().for_each(|o| *o /= k);
    out
}

/// Evolve hyperparameters from the family's defaults.
///
/// Each generation perturbs the running mean in rescaled space, scores every
/// individual in parallel with its own seed, and moves the mean to the
/// average of the better half.
pub fn tune(family: &dyn Family, schedule: &Schedule, population: usize, seed: u64) -> Result<TuneResult> {
    if population < 2 {
        return Err(LodoError::InvalidArgument(format!("population must be at least 2, got {population}")));
    }
    if schedule.is_empty() {
        return Err(LodoError::InvalidArgument("empty schedule".into()));
    }
    let space = family.space();
    let mut mean = space.rescale(&family.defaults())?;
    let mut noise_scale = 1.0;
    let mut lineage = Vec::with_capacity(schedule.len());

    for (g, gen) in schedule.generations.iter().enumerate() {
        let noise = gen.noise_stddev * noise_scale;
        let mut rng = rng_from_seed(derive_seed(seed, &[MUTATION_STREAM, g as u64]));
        let mut candidates = Vec::with_capacity(population);
        for i in 0..population {
            let drawn: Vec<f64> = mean
                .iter()
                .map(|&m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + noise * z
                })
                .collect();
            let (raw, clamped) = space.unrescale(&drawn)?;
            if clamped > 0 {
                log::info!("generation {g} individual {i}: {clamped} hyperparameter(s) clamped into range");
            }
            // Clamped coordinates are pulled back so the mean stays in-domain.
            let rescaled = if clamped > 0 { space.rescale(&raw)? } else { drawn };
            candidates.push((rescaled, raw, derive_seed(seed, &[EVAL_STREAM, g as u64, i as u64])));
        }

        let individuals: Vec<Genome> = candidates
            .into_par_iter()
            .map(|(rescaled, raw, s)| {
                let f = family.fitness(&raw, gen.steps, s)?;
                Ok(Genome {
                    rescaled,
                    raw,
                    seed: s,
                    fitness: if f.is_nan() { f64::INFINITY } else { f },
                })
            })
            .collect::<Result<_>>()?;

        let all_diverged = individuals.iter().all(Genome::diverged);
        let fitness: Vec<f64> = individuals.iter().map(|g| g.fitness).collect();
        let survivors = select_survivors(&fitness, population / 2);
        let previous = mean.clone();
        if all_diverged {
            noise_scale *= 0.5;
            log::warn!("generation {g}: every individual diverged; keeping the mean and halving the noise");
        } else {
            let rows: Vec<Vec<f64>> = individuals.iter().map(|g| g.rescaled.clone()).collect();
            mean = mean_of(&rows, &survivors);
        }
        let (next_raw, _) = space.unrescale(&mean)?;
        log::info!("generation {g}: best fitness {:.6}, mean {:?}", fitness[survivors[0]], next_raw);
        lineage.push(GenerationLog {
            generation: g,
            noise_stddev: noise,
            steps: gen.steps,
            mean_rescaled: previous,
            individuals,
            survivors,
            next_mean_rescaled: mean.clone(),
            next_mean_raw: next_raw,
            all_diverged,
        });
    }

    let (best, _) = space.unrescale(&mean)?;
    Ok(TuneResult {
        names: space.params.iter().map(|p| p.name.clone()).collect(),
        best,
        best_rescaled: mean,
        lineage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuner::{HyperKind, HyperParam};
    use proptest::prelude::*;

    /// Quadratic in rescaled space with its optimum at lr = 0.1, decay = 0.9.
    struct Toy;

    impl Family for Toy {
        fn space(&self) -> HyperSpace {
            HyperSpace::new(vec![
                HyperParam::new("lr", HyperKind::LearningRate),
                HyperParam::new("decay", HyperKind::Decay),
            ])
        }
        fn defaults(&self) -> Vec<f64> {
            vec![1.0, 0.0]
        }
        fn fitness(&self, raw: &[f64], _steps: usize, _seed: u64) -> Result<f64> {
            let r = self.space().rescale(raw)?;
            let t = self.space().rescale(&[0.1, 0.9])?;
            Ok((r[0] - t[0]).powi(2) + (r[1] - t[1]).powi(2))
        }
    }

    struct AlwaysDiverges;

    impl Family for AlwaysDiverges {
        fn space(&self) -> HyperSpace {
            HyperSpace::new(vec![HyperParam::new("x", HyperKind::Plain)])
        }
        fn defaults(&self) -> Vec<f64> {
            vec![2.0]
        }
        fn fitness(&self, _: &[f64], _: usize, _: u64) -> Result<f64> {
            Ok(f64::INFINITY)
        }
    }

    #[test]
    fn zero_noise_returns_defaults() {
        let sched = Schedule::from_pairs(&[(0.0, 1); 4]).unwrap();
        let out = tune(&Toy, &sched, 8, 3).unwrap();
        assert!((out.best[0] - 1.0).abs() < 1e-12);
        assert!(out.best[1].abs() < 1e-12);
    }

    #[test]
    fn moves_toward_the_optimum() {
        let sched = Schedule::from_pairs(&[(1.0, 1), (1.0, 1), (0.5, 1), (0.5, 1), (0.25, 1)]).unwrap();
        let out = tune(&Toy, &sched, 32, 7).unwrap();
        let start = Toy.fitness(&Toy.defaults(), 1, 0).unwrap();
        let end = Toy.fitness(&out.best, 1, 0).unwrap();
        assert!(end < 0.25 * start, "{start} -> {end}");
        assert_eq!(out.lineage.len(), 5);
    }

    #[test]
    fn deterministic() {
        let sched = Schedule::from_pairs(&[(1.0, 1), (0.5, 1)]).unwrap();
        assert_eq!(tune(&Toy, &sched, 8, 1).unwrap(), tune(&Toy, &sched, 8, 1).unwrap());
        assert_ne!(tune(&Toy, &sched, 8, 1).unwrap().best, tune(&Toy, &sched, 8, 2).unwrap().best);
    }

    #[test]
    fn all_diverged_keeps_mean_and_halves_noise() {
        let sched = Schedule::from_pairs(&[(1.0, 1), (1.0, 1), (1.0, 1)]).unwrap();
        let out = tune(&AlwaysDiverges, &sched, 4, 0).unwrap();
        assert_eq!(out.best, vec![2.0]);
        let noise: Vec<f64> = out.lineage.iter().map(|l| l.noise_stddev).collect();
        assert_eq!(noise, vec![1.0, 0.5, 0.25]);
        assert!(out.lineage.iter().all(|l| l.all_diverged));
    }

    #[test]
    fn rejects_tiny_population() {
        let sched = Schedule::from_pairs(&[(1.0, 1)]).unwrap();
        assert!(tune(&Toy, &sched, 1, 0).is_err());
    }

    #[test]
    fn survivors_prefer_low_fitness() {
        assert_eq!(select_survivors(&[3.0, f64::INFINITY, 1.0, f64::NAN, 2.0], 3), vec![2, 4, 0]);
    }

    proptest! {
        #[test]
        fn selection_ignores_positive_scaling(
            fit in proptest::collection::vec(0.0f64..100.0, 2..40),
            c in 1e-3f64..1e3,
        ) {
            let keep = fit.len() / 2;
            let scaled: Vec<f64> = fit.iter().map(|f| f * c).collect();
            let a = select_survivors(&fit, keep);
            let b = select_survivors(&scaled, keep);
            let rows: Vec<Vec<f64>> = (0..fit.len()).map(|i| vec![i as f64, -(i as f64)]).collect();
            prop_assert_eq!(mean_of(&rows, &a), mean_of(&rows, &b));
            prop_assert_eq!(a, b);
        }
    }
}
