//! Moments of quantum observables and covariance-free variance uncertainty
//! relations for three and four observables.
//!
//! The crate is organised bottom-up:
//!
//! * [`operator`]: Hermitian operators, states, expectation values, PSD tests.
//! * [`moments`]: mean vector, covariance matrix `X` and commutator matrix `Y`.
//! * [`inequalities`]: uniform evaluators for every pair, triple and quadruple bound.
//! * [`states`]: Fock ladder operators, correlated coherent states, spin operators,
//!   and the two-dimensional Gaussian wavefunction.
//! * [`gaussian`]: analytic Gaussian phase-space states and fourth-moment decoupling.
//! * [`scenario`]: JSON state/tuple specs and their resolution into a [`MomentSet`].
//! * [`search`]: multistart simplex search and parameter sweeps.

pub mod error;
pub mod gaussian;
pub mod inequalities;
pub mod moments;
pub mod operator;
pub mod scenario;
pub mod search;
pub mod states;

pub use error::{Error, Result};
pub use gaussian::GaussianState;
pub use inequalities::{FourTupleDerived, InequalityReport};
pub use moments::{MomentOptions, MomentSet};
pub use operator::{Operator, PsdReport, QuantumState, Tolerances};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
