//! Monte Carlo and state-vector validation of the Deutsch-Jozsa ensemble
//! protocol.

mod circuit;
mod oracle;
mod trials;

pub use circuit::{apply_circuit, trace_circuit, CircuitTrace, RegisterState, MAX_CIRCUIT_BITS};
pub use oracle::{FunctionKind, OracleSpec, MAX_ORACLE_BITS};
pub use trials::{
    classical_run, estimate_classical_failure, estimate_failure_rate, pseudo_pure_plus_probability,
    run_ensemble_trial, sample_member, trial_rng, trial_results, FailureEstimate, TrialResult,
    QUERIES_PER_MEMBER,
};
