//! Simulation and analysis toolkit for trapped-ion phonon lasers.
//!
//! The numerical path builds truncated Lindblad models of the two-ion and
//! single-ion lasers and solves for their steady states. The analytic path
//! covers mean-field intensities and phases, recurrence-based phonon
//! statistics, the hypergeometric second-order coherence and the
//! squeezed-lasing sensing figures.
//!
//! Analytic modules are generic over the real scalar; the aliases below fix
//! it to `f64`.

pub mod hilbert;
pub mod lindblad;
pub mod meanfield;
pub mod models;
pub mod observables;
pub mod quantum_stats;
pub mod scalar;
pub mod sensing;
pub mod specfun;
mod sparse;

pub use scalar::Real;

pub type Params = models::ModelParams<f64>;
pub type Distribution = quantum_stats::PhononDistribution<f64>;
pub type MeanField = meanfield::MeanFieldState<f64>;
pub type Signal = sensing::SignalParams<f64>;
pub type Sensing = sensing::SensingReport<f64>;
pub type Hypergeometric = specfun::HypergeometricArgs<f64>;
