use num_rational::BigRational;
use num_traits::One;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracle::{FunctionKind, OracleSpec};
use crate::failure::{decide, Decision, EnsembleOutcome, EnsembleSpec, InputClass, Polarization};
use crate::{Error, Result};

/// Each ensemble member runs the circuit once, so `Q = M`.
pub const QUERIES_PER_MEMBER: u64 = 1;

/// Independent stream for trial `index`: same key, stream id = index.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One member's `σ_z` outcome, `+1` with probability `(1 ± ε)/2`.
pub fn sample_member<R: Rng + ?Sized>(eps: &Polarization, class: InputClass, rng: &mut R) -> i8 {
    let e = eps.value();
    let plus = match class {
        InputClass::Class0 => (1.0 + e) / 2.0,
        InputClass::Class1 => (1.0 - e) / 2.0,
    };
    if rng.random_bool(plus) {
        1
    } else {
        -1
    }
}

/// `Pr(z = +1)` for a pseudo-pure input whose pure component yields `+1` with
/// probability `pure_plus`: the identity part contributes a fair coin.
pub fn pseudo_pure_plus_probability(eps: &BigRational, pure_plus: &BigRational) -> BigRational {
    let half = BigRational::new(1.into(), 2.into());
    (BigRational::one() - eps) * half + eps * pure_plus
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub outcome: EnsembleOutcome,
    pub decision: Decision,
    /// Class finally reported, after any guess.
    pub verdict: InputClass,
    pub correct: bool,
    pub oracle_calls: u64,
}

pub fn run_ensemble_trial<R: Rng + ?Sized>(
    eps: &Polarization,
    spec: &EnsembleSpec,
    class: InputClass,
    rng: &mut R,
) -> TrialResult {
    let m = spec.m();
    let mut m_plus = 0u64;
    for _ in 0..m {
        if sample_member(eps, class, rng) > 0 {
            m_plus += 1;
        }
    }
    let outcome = EnsembleOutcome::new(m_plus, m - m_plus);
    let decision = decide(&outcome, spec);
    let verdict = match decision {
        Decision::Class0 => InputClass::Class0,
        Decision::Class1 => InputClass::Class1,
        Decision::Guess => {
            if rng.random_bool(0.5) {
                InputClass::Class1
            } else {
                InputClass::Class0
            }
        }
    };
    TrialResult {
        outcome,
        decision,
        verdict,
        correct: verdict == class,
        oracle_calls: m * QUERIES_PER_MEMBER,
    }
}

fn seeded_trial(eps: &Polarization, spec: &EnsembleSpec, seed: u64, index: u64) -> (InputClass, TrialResult) {
    let mut rng = trial_rng(seed, index);
    let class = if rng.random_bool(0.5) {
        InputClass::Class1
    } else {
        InputClass::Class0
    };
    (class, run_ensemble_trial(eps, spec, class, &mut rng))
}

/// The full trial sequence, identical for a given seed however it is scheduled.
pub fn trial_results(
    eps: &Polarization,
    spec: &EnsembleSpec,
    trials: u64,
    seed: u64,
) -> Vec<(InputClass, TrialResult)> {
    (0..trials)
        .into_par_iter()
        .map(|i| seeded_trial(eps, spec, seed, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureEstimate {
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    /// `√(rate(1 - rate)/trials)`.
    pub stderr: f64,
}

impl FailureEstimate {
    fn new(failures: u64, trials: u64) -> Self {
        let rate = failures as f64 / trials as f64;
        Self {
            trials,
            failures,
            rate,
            stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
        }
    }
}

/// Monte Carlo failure rate with the input class drawn ½/½ per trial.
pub fn estimate_failure_rate(
    eps: &Polarization,
    spec: &EnsembleSpec,
    trials: u64,
    seed: u64,
) -> Result<FailureEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&i| !seeded_trial(eps, spec, seed, i).1.correct)
        .count() as u64;
    Ok(FailureEstimate::new(failures, trials))
}

/// Queries `f` on `m` distinct uniformly chosen arguments and answers
/// constant iff every output agrees.
pub fn classical_run<R: Rng + ?Sized>(f: &OracleSpec, m: u64, rng: &mut R) -> Result<(FunctionKind, bool)> {
    if m == 0 || m > f.size() {
        return Err(Error::InvalidArgument(format!(
            "classical query count {m} must lie in 1..={}",
            f.size()
        )));
    }
    let mut args = index::sample(rng, f.size() as usize, m as usize).into_iter();
    let first = f.eval(args.next().expect("m ≥ 1") as u64);
    let verdict = if args.all(|x| f.eval(x as u64) == first) {
        FunctionKind::Constant
    } else {
        FunctionKind::Balanced
    };
    Ok((verdict, verdict == f.kind()))
}

/// Classical failure rate when `f` is balanced with probability `p_bal`
/// (uniform over balanced functions) and otherwise a uniformly chosen
/// constant. Each trial builds a full truth table, costing `O(2^n)`.
pub fn estimate_classical_failure(
    n: u32,
    m: u64,
    p_bal: f64,
    trials: u64,
    seed: u64,
) -> Result<FailureEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p_bal) {
        return Err(Error::ProbabilityOutOfRange(p_bal));
    }
    let failures = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let mut rng = trial_rng(seed, i);
            let f = if rng.random_bool(p_bal) {
                OracleSpec::random_balanced(n, &mut rng)?
            } else {
                OracleSpec::constant(n, rng.random_bool(0.5))?
            };
            Ok(!classical_run(&f, m, &mut rng)?.1)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&failed| failed)
        .count() as u64;
    Ok(FailureEstimate::new(failures, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::failure::{individual_outcome_probs, pfail_best};
    use crate::prob::rat;

    fn within(rate: f64, target: f64, trials: u64, k: f64) -> bool {
        let sigma = (target * (1.0 - target) / trials as f64).sqrt();
        (rate - target).abs() <= k * sigma
    }

    #[test]
    fn member_examples() {
        let mut rng = trial_rng(1, 0);
        let pure = Polarization::new(1.0).unwrap();
        assert!((0..1000).all(|_| sample_member(&pure, InputClass::Class0, &mut rng) == 1));
        let mixed = Polarization::new(0.0).unwrap();
        let sum: i64 = (0..100_000).map(|_| sample_member(&mixed, InputClass::Class1, &mut rng) as i64).sum();
        assert!((sum as f64).abs() <= 4.0 * 100_000f64.sqrt());
        let half = Polarization::new(0.5).unwrap();
        let plus = (0..100_000)
            .filter(|_| sample_member(&half, InputClass::Class0, &mut rng) == 1)
            .count();
        assert!(within(plus as f64 / 1e5, 0.75, 100_000, 4.0));
    }

    #[test]
    fn trial_examples() {
        let mut rng = trial_rng(3, 0);
        let spec = EnsembleSpec::best(5).unwrap();
        let t = run_ensemble_trial(&Polarization::new(1.0).unwrap(), &spec, InputClass::Class0, &mut rng);
        assert_eq!(t.outcome.m_plus, 5);
        assert_eq!(t.decision, Decision::Class0);
        assert!(t.correct);
        assert_eq!(t.oracle_calls, 5);
    }

    #[test]
    fn estimator_examples() {
        let spec = |m| EnsembleSpec::best(m).unwrap();
        let one = estimate_failure_rate(&Polarization::new(1.0).unwrap(), &spec(7), 1000, 5).unwrap();
        assert_eq!(one.rate, 0.0);
        let zero = estimate_failure_rate(&Polarization::new(0.0).unwrap(), &spec(11), 100_000, 5).unwrap();
        assert!(within(zero.rate, 0.5, 100_000, 4.0));
        let half = Polarization::new(0.5).unwrap();
        let e3 = estimate_failure_rate(&half, &spec(3), 100_000, 9).unwrap();
        assert!((e3.rate - 0.15625).abs() <= 4.0 * e3.stderr);
        let e2 = estimate_failure_rate(&half, &spec(2), 100_000, 9).unwrap();
        assert!((e2.rate - 0.25).abs() <= 4.0 * e2.stderr);
        let exact = pfail_best(&half, 11).unwrap().value();
        let e11 = estimate_failure_rate(&half, &spec(11), 100_000, 9).unwrap();
        assert!((e11.rate - exact).abs() <= 4.0 * e11.stderr);
        assert!(estimate_failure_rate(&half, &spec(3), 0, 1).is_err());
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let eps = Polarization::new(0.3).unwrap();
        let spec = EnsembleSpec::new(9, 3.0).unwrap();
        let par = trial_results(&eps, &spec, 2000, 42);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| trial_results(&eps, &spec, 2000, 42));
        assert_eq!(par, single);
        let seq: Vec<_> = (0..2000).map(|i| seeded_trial(&eps, &spec, 42, i)).collect();
        assert_eq!(par, seq);
        assert_ne!(par, trial_results(&eps, &spec, 2000, 43));
    }

    #[test]
    fn pseudo_pure_matches_member_law() {
        for (a, b) in [(0, 1), (1, 3), (1, 2), (7, 9), (1, 1)] {
            let e = rat(a, b);
            let eps = Polarization::exact(e.clone()).unwrap();
            for (class, pure_plus) in [(InputClass::Class0, rat(1, 1)), (InputClass::Class1, rat(0, 1))] {
                let (plus, _) = individual_outcome_probs(&eps, class);
                assert_eq!(pseudo_pure_plus_probability(&e, &pure_plus), plus.exact.unwrap());
            }
        }
    }

    #[test]
    fn classical_examples() {
        let mut rng = trial_rng(8, 0);
        let c = OracleSpec::constant(3, false).unwrap();
        for m in 1..=8 {
            assert!(classical_run(&c, m, &mut rng).unwrap().1);
        }
        let f = OracleSpec::from_table(vec![true, false, false, true]).unwrap();
        let fails = (0..100_000).filter(|_| !classical_run(&f, 2, &mut rng).unwrap().1).count();
        assert!(within(fails as f64 / 1e5, 1.0 / 3.0, 100_000, 4.0));
        for _ in 0..200 {
            let g = OracleSpec::random_balanced(4, &mut rng).unwrap();
            assert!(classical_run(&g, 9, &mut rng).unwrap().1);
        }
        assert!(classical_run(&f, 5, &mut rng).is_err());
        let est = estimate_classical_failure(3, 2, 0.5, 50_000, 4).unwrap();
        // ½ · (2·C(4,2)/C(8,2)) = 3/14
        assert!(within(est.rate, 3.0 / 14.0, 50_000, 4.0));
    }
}
