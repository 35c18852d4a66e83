//! Failure probabilities of ensemble (pseudo-pure state) quantum algorithms
//! with a one-bit answer, the classical probabilistic algorithms they compete
//! against, and the critical polarization at which the two break even.
//!
//! The crate is organised bottom-up:
//!
//! * [`prob`] binomial masses, cumulative tails and the integer-argument
//!   regularized incomplete beta function, each with an exact rational path
//!   and a log-space floating path.
//! * [`failure`] the ensemble measurement model and majority-vote decision
//!   protocol, including finite measurement resolution.
//! * [`bahadur`] Bahadur's two-sided tail bounds and the large-ensemble
//!   approximation built on them.
//! * [`classical`] failure probabilities of classical competitors, including
//!   the exact Deutsch-Jozsa sampling algorithm.
//! * [`critical`] the critical-polarization solver and closed forms.
//! * [`sim`] a state-vector Deutsch-Jozsa simulator plus seeded Monte Carlo
//!   ensemble trials used to validate the analytic results.
//! * [`verify`] a catalogue of identity checks run by `qcrit verify`.

pub mod bahadur;
pub mod classical;
pub mod critical;
mod error;
pub mod failure;
pub mod prob;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use prob::{FailureProbability, ProbabilityValue};
