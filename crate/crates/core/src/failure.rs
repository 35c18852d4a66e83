//! Ensemble measurement model and the decision protocol built on it.
//!
//! Each of the `M` ensemble members yields `z = ±1` on the target qubit.
//! For a class-0 input `Pr(z = +1) = (1 + ε)/2`; a class-1 input swaps the
//! two. The verdict is read off the excess `ΔM = M₊ - M₋`: anything with
//! `|ΔM| < ⌈R/2⌉` is indistinguishable from noise and resolved by a fair coin.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::prob::{
    binom_pmf_exact, binom_tail_exact, ln_add_exp, ln_binom_pmf, ln_binom_tail, rational_to_f64,
};
use crate::{Error, FailureProbability, ProbabilityValue, Result};

/// Weight of the pure component of a pseudo-pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Polarization {
    value: f64,
    exact: Option<BigRational>,
}

impl Polarization {
    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidPolarization(eps));
        }
        Ok(Self {
            value: eps,
            exact: None,
        })
    }

    /// A rational polarization; every probability derived from it is exact.
    pub fn exact(eps: BigRational) -> Result<Self> {
        let value = rational_to_f64(&eps);
        if eps.is_negative() || eps > BigRational::one() {
            return Err(Error::InvalidPolarization(value));
        }
        Ok(Self {
            value,
            exact: Some(eps),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    /// Probability `(1 - ε)/2` that a single member reports the wrong class.
    pub fn bernoulli_p(&self) -> f64 {
        (1.0 - self.value) / 2.0
    }

    pub fn bernoulli_p_exact(&self) -> Option<BigRational> {
        self.exact
            .as_ref()
            .map(|e| (BigRational::one() - e) / BigRational::from_integer(BigInt::from(2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputClass {
    Class0,
    Class1,
}

impl InputClass {
    pub fn flip(self) -> Self {
        match self {
            InputClass::Class0 => InputClass::Class1,
            InputClass::Class1 => InputClass::Class0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Class0,
    Class1,
    Guess,
}

impl From<InputClass> for Decision {
    fn from(c: InputClass) -> Self {
        match c {
            InputClass::Class0 => Decision::Class0,
            InputClass::Class1 => Decision::Class1,
        }
    }
}

fn half_resolution(r: f64) -> Result<u64> {
    if !r.is_finite() || r < 2.0 {
        return Err(Error::InvalidResolution(r));
    }
    Ok((r / 2.0).ceil() as u64)
}

/// Minimum number of `z = -1` outcomes that makes a class-0 input fail
/// unequivocally: `⌈(M + ⌈R/2⌉)/2⌉`.
pub fn m_min(m: u64, r: f64) -> Result<u64> {
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let half = half_resolution(r)?;
    // ⌈R/2⌉ > M means |ΔM| ≤ M can never reach a verdict.
    if half > m {
        return Err(Error::ResolutionTooCoarse { half, limit: m });
    }
    Ok((m + half).div_ceil(2))
}

/// Ensemble size together with the measurement resolution `R` (in units of ΔM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    m: u64,
    r: f64,
    m_min: u64,
}

impl EnsembleSpec {
    pub fn new(m: u64, r: f64) -> Result<Self> {
        let m_min = m_min(m, r)?;
        Ok(Self { m, r, m_min })
    }

    /// Best resolution, `R = 2`.
    pub fn best(m: u64) -> Result<Self> {
        Self::new(m, 2.0)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn resolution(&self) -> f64 {
        self.r
    }

    pub fn m_min(&self) -> u64 {
        self.m_min
    }

    /// `⌈R/2⌉`, the smallest `|ΔM|` that produces a verdict.
    pub fn half_resolution(&self) -> u64 {
        (self.r / 2.0).ceil() as u64
    }
}

/// Counts of `+1` and `-1` outcomes over one ensemble run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleOutcome {
    pub m_plus: u64,
    pub m_minus: u64,
}

impl EnsembleOutcome {
    pub fn new(m_plus: u64, m_minus: u64) -> Self {
        Self { m_plus, m_minus }
    }

    pub fn size(&self) -> u64 {
        self.m_plus + self.m_minus
    }

    pub fn delta_m(&self) -> i64 {
        self.m_plus as i64 - self.m_minus as i64
    }

    /// Sample average `ΔM / M`.
    pub fn z_bar(&self) -> Rational64 {
        Rational64::new(self.delta_m(), self.size() as i64)
    }
}

/// Applies the threshold protocol; `Guess` is left to the caller.
pub fn decide(outcome: &EnsembleOutcome, spec: &EnsembleSpec) -> Decision {
    debug_assert_eq!(outcome.size(), spec.m());
    let half = spec.half_resolution() as i64;
    let dm = outcome.delta_m();
    if dm >= half {
        Decision::Class0
    } else if dm <= -half {
        Decision::Class1
    } else {
        Decision::Guess
    }
}

/// Failure probability by summing over every `(M₊, M₋)` split and running
/// [`decide`] on it. Needs an exact polarization.
pub fn pfail_enumerated(eps: &Polarization, spec: &EnsembleSpec, class: InputClass) -> Result<BigRational> {
    let (plus, _) = individual_outcome_probs(eps, class);
    let pp = plus
        .exact
        .ok_or_else(|| Error::InvalidArgument("enumeration needs an exact polarization".into()))?;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut total = BigRational::zero();
    for m_plus in 0..=spec.m() {
        let outcome = EnsembleOutcome::new(m_plus, spec.m() - m_plus);
        let fail = match decide(&outcome, spec) {
            Decision::Guess => half.clone(),
            d if d == Decision::from(class) => continue,
            _ => BigRational::one(),
        };
        total += binom_pmf_exact(spec.m(), m_plus, &pp)? * fail;
    }
    Ok(total)
}

/// `(Pr(z = +1), Pr(z = -1))` for a single ensemble member.
pub fn individual_outcome_probs(
    eps: &Polarization,
    class: InputClass,
) -> (ProbabilityValue, ProbabilityValue) {
    let (plus, minus) = match eps.exact_value() {
        Some(e) => {
            let two = BigRational::from_integer(BigInt::from(2));
            let plus = (BigRational::one() + e) / &two;
            let minus = (BigRational::one() - e) / &two;
            (
                ProbabilityValue::from_exact(plus),
                ProbabilityValue::from_exact(minus),
            )
        }
        None => {
            let e = eps.value();
            (
                ProbabilityValue::from_f64((1.0 + e) / 2.0),
                ProbabilityValue::from_f64((1.0 - e) / 2.0),
            )
        }
    };
    match class {
        InputClass::Class0 => (plus, minus),
        InputClass::Class1 => (minus, plus),
    }
}

/// Expectation of `σ_z` on the target qubit: `+ε` for class 0, `-ε` for class 1.
pub fn target_expectation(eps: &Polarization, class: InputClass) -> f64 {
    match class {
        InputClass::Class0 => eps.value(),
        InputClass::Class1 => -eps.value(),
    }
}

/// `ln` of the best-resolution failure probability, odd/even formulas.
pub fn ln_pfail_best(eps: f64, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    Polarization::new(eps)?;
    let p = (1.0 - eps) / 2.0;
    if m % 2 == 1 {
        ln_binom_tail(m, m.div_ceil(2), p)
    } else {
        let strict = ln_binom_tail(m, m / 2 + 1, p)?;
        let tie = ln_binom_pmf(m, m / 2, p)? - std::f64::consts::LN_2;
        Ok(ln_add_exp(strict, tie))
    }
}

/// Best-resolution (`R = 2`) failure probability.
///
/// Odd `M`: `B_M((M+1)/2)`. Even `M`: `B_M(M/2 + 1) + ½·b(M/2)`, the second
/// term being the tie that is resolved by an unbiased guess.
pub fn pfail_best(eps: &Polarization, m: u64) -> Result<FailureProbability> {
    let Some(p) = eps.bernoulli_p_exact() else {
        return ln_pfail_best(eps.value(), m).map(ProbabilityValue::from_ln);
    };
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let value = if m % 2 == 1 {
        binom_tail_exact(m, m.div_ceil(2), &p)?
    } else {
        binom_tail_exact(m, m / 2 + 1, &p)?
            + binom_pmf_exact(m, m / 2, &p)? / BigRational::from_integer(BigInt::from(2))
    };
    Ok(ProbabilityValue::from_exact(value))
}

fn check_threshold(m: u64, m_min: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if 2 * m_min <= m || m_min > m + 1 {
        return Err(Error::InvalidThreshold { m, m_min });
    }
    Ok(())
}

/// `ln` of the general-resolution failure probability for an explicit `m_min`.
pub fn ln_pfail_threshold(eps: f64, m: u64, m_min: u64) -> Result<f64> {
    check_threshold(m, m_min)?;
    Polarization::new(eps)?;
    let p = (1.0 - eps) / 2.0;
    let unequivocal = ln_binom_tail(m, m_min, p)?;
    let with_guesses = ln_binom_tail(m, m + 1 - m_min, p)?;
    Ok(ln_add_exp(unequivocal, with_guesses) - std::f64::consts::LN_2)
}

/// `½·B_M(m_min) + ½·B_M(M - m_min + 1)` with `p = (1 - ε)/2`, for any
/// admissible threshold `M/2 < m_min ≤ M + 1`.
pub fn pfail_threshold(eps: &Polarization, m: u64, m_min: u64) -> Result<FailureProbability> {
    let Some(p) = eps.bernoulli_p_exact() else {
        return ln_pfail_threshold(eps.value(), m, m_min).map(ProbabilityValue::from_ln);
    };
    check_threshold(m, m_min)?;
    let sum = binom_tail_exact(m, m_min, &p)? + binom_tail_exact(m, m + 1 - m_min, &p)?;
    Ok(ProbabilityValue::from_exact(
        sum / BigRational::from_integer(BigInt::from(2)),
    ))
}

/// General-resolution failure probability for the ensemble described by `spec`.
pub fn pfail_general(eps: &Polarization, spec: &EnsembleSpec) -> Result<FailureProbability> {
    pfail_threshold(eps, spec.m(), spec.m_min())
}

pub fn ln_pfail_general(eps: f64, spec: &EnsembleSpec) -> Result<f64> {
    ln_pfail_threshold(eps, spec.m(), spec.m_min())
}

/// Exact difference `pfail_best(M+2) - pfail_best(M)` for odd `M`:
/// `-C(M, (M+1)/2)·(1 - 2p)·p^((M+1)/2)·(1 - p)^((M+1)/2)`.
pub fn best_step_closed_form(p: &BigRational, m: u64) -> Result<BigRational> {
    if m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("M = {m} must be odd")));
    }
    let h = m.div_ceil(2) as usize;
    let one = BigRational::one();
    let c = BigRational::from_integer(BigInt::from(crate::prob::binomial(m, h as u64)));
    let two_p = p * BigRational::from_integer(BigInt::from(2));
    Ok(-(c * (&one - two_p) * num_traits::pow(p.clone(), h) * num_traits::pow(&one - p, h)))
}
