//! Sampling from the Gibbs measure.
//!
//! [`mh_chain`] is a single-particle random-walk Metropolis chain that works
//! for every model. For `β = 2` the Cauchy and spherical ensembles also have
//! exact matrix-model samplers, which need a dense eigenvalue backend (see
//! [`EigenBackend`]; the bundled one requires the `matrix` feature).

mod matrix;
mod mcmc;

#[cfg(feature = "matrix")]
pub use matrix::NalgebraBackend;
pub use matrix::{
    default_backend, haar_unitary, sample_cauchy_ensemble, sample_cauchy_ensemble_with,
    sample_spherical_ensemble, sample_spherical_ensemble_with, ComplexMatrix, EigenBackend, MAX_MATRIX_SIZE,
};
pub use mcmc::{
    chain_rng, log_acceptance_ratio, mh_chain, run_chains, ChainOutput, ChainParams, ChainStats, HeavyTail,
    Recorded, TraceSummary,
};
