//! Genetic hyperparameter search in rescaled coordinates.

mod genetic;
mod schedule;
mod space;

pub use genetic::{
    mean_of, select_survivors, tune, Family, GenerationLog, Genome, OptimizerFamily, TuneResult,
};
pub use schedule::{Generation, Schedule};
pub use space::{rescale_value, unrescale_value, HyperKind, HyperParam, HyperSpace, MAX_DECAY};
