//! Numerical checks of the learning-dynamics and expressiveness claims.

mod dynamics;
mod entropy;
mod sigma;

pub use dynamics::{simulate_dense_dynamics, simulate_simplified_lodo, DynamicsRow, DynamicsSetup, DynamicsTrace};
pub use entropy::{
    estimate_entropy_curve, estimate_permutation_entropy, reachability_fraction, reachable_fraction_for_seed,
    EntropyEstimate, PermutationTable,
    MAX_ENUMERABLE,
};
pub use sigma::{estimate_sigma, sigma_squared_samples};
