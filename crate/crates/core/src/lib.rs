//! LODO: an optimizer that learns its own inverse-Hessian model online.
//!
//! The crate is organized around five pieces:
//!
//! * [`gmat`]: the learnable operators `G(θ)` and their hypergradients.
//! * [`optimizers`]: the LODO update loop, its meta-optimizer, and the
//!   first-order baselines it is benchmarked against.
//! * [`tasks`]: loss-and-gradient oracles (noisy quadratic bowl, Rosenbrock).
//! * [`theory`]: numerical checks of the dense learning dynamics, the
//!   Hessian-error estimator, and permutation-entropy statistics.
//! * [`tuner`]: the genetic hyperparameter tuner.

pub mod error;
pub mod gmat;
pub mod linalg;
pub mod optimizers;
pub mod rng;
pub mod stats;
pub mod tasks;
pub mod theory;
pub mod tuner;

pub use error::{LodoError, Result};
pub use gmat::{GNetConfig, GNetwork, Preconditioner, ThetaGradient, Variant};
