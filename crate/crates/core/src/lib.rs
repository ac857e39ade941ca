//! Bayesian mean estimation of quantum states.
//!
//! The crate covers sequential estimation with Haar-random or unitary-design
//! measurement bases, single-shot estimation with the pretty good
//! measurement and its Petz-recovery reading, the closed forms available for
//! pure-state ensembles, and a seeded Monte-Carlo harness that aggregates
//! average fidelities over batches of experiments.
//!
//! Linear algebra is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common double-precision instantiations. The experiment
//! harness runs in `f64`.

pub mod bayes;
pub mod bounds;
pub mod designs;
pub mod error;
pub mod experiments;
pub mod fidelity;
pub mod linalg;
pub mod pgm;
pub mod sampling;
pub mod scalar;
pub mod state;
pub mod tolerance;

pub use error::{Error, Result};
pub use scalar::Real;
pub use state::{validate_density, EnsembleKind};
pub use tolerance::Tolerances;

pub type ComplexMatrix = linalg::ComplexMatrix<f64>;
pub type ComplexVector = linalg::ComplexVector<f64>;
pub type DensityMatrix = state::DensityMatrix<f64>;
pub type PureState = state::PureState<f64>;
pub type ProbVector = state::ProbVector<f64>;
pub type Povm = state::Povm<f64>;
pub type Unitary = state::Unitary<f64>;
pub type Ensemble = state::Ensemble<f64>;
pub type Posterior = bayes::Posterior<f64>;
pub type UnitarySet = designs::UnitarySet<f64>;

pub type DensityMatrix32 = state::DensityMatrix<f32>;
pub type Ensemble32 = state::Ensemble<f32>;
pub type Unitary32 = state::Unitary<f32>;

/// Crate version recorded in run summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
