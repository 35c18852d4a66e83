//! Bahadur's bounds on the upper binomial tail and the large-ensemble
//! approximation of the quantum failure probability derived from them.
//!
//! For `np ≤ m ≤ n`,
//!
//! ```text
//! A_n(m) / [1 + np(1-p)/(m-np)²]  ≤  B_n(m)  ≤  A_n(m)
//! A_n(m) = C(n,m) p^m (1-p)^(n-m) · (m+1)(1-p) / ((m+1) - (n+1)p)
//! ```
//!
//! The bracket divides on the lower side; multiplying by it (as it is
//! sometimes printed) would put the "lower" bound above the upper one.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::failure::Polarization;
use crate::prob::{binom_pmf_exact, ln_binom_pmf, rational_to_f64, BinomialTailQuery, ProbArg};
use crate::{Error, FailureProbability, ProbabilityValue, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BahadurBounds {
    pub applicable: bool,
    pub upper: Option<ProbabilityValue>,
    pub lower: Option<ProbabilityValue>,
    /// `1 + np(1-p)/(m-np)²`, always ≥ 1.
    pub correction: Option<f64>,
}

impl BahadurBounds {
    fn inapplicable() -> Self {
        Self {
            applicable: false,
            upper: None,
            lower: None,
            correction: None,
        }
    }
}

/// `np < m ≤ n` and `0 < p < 1`, decided exactly when `p` is rational.
fn is_applicable(n: u64, m: u64, p: &ProbArg) -> bool {
    if m > n {
        return false;
    }
    match p {
        ProbArg::Exact(r) => {
            if r.is_zero() || r.is_one() {
                return false;
            }
            let mean = r * BigRational::from_integer(BigInt::from(n));
            BigRational::from_integer(BigInt::from(m)) > mean
        }
        ProbArg::Float(x) => *x > 0.0 && *x < 1.0 && (m as f64) > n as f64 * x,
    }
}

/// Bounds on `B_n(m)`; exact rationals when the query's `p` is rational.
pub fn bahadur_bounds(q: &BinomialTailQuery) -> BahadurBounds {
    let (n, m) = (q.n, q.m);
    if !is_applicable(n, m, &q.p) {
        return BahadurBounds::inapplicable();
    }
    if let ProbArg::Exact(p) = &q.p {
        return exact_bounds(n, m, p);
    }
    let p = q.p.as_f64();
    let (nf, mf) = (n as f64, m as f64);
    let denom = (mf + 1.0) - (nf + 1.0) * p;
    if denom <= 0.0 {
        return BahadurBounds::inapplicable();
    }
    let ln_pmf = match ln_binom_pmf(n, m, p) {
        Ok(v) => v,
        Err(_) => return BahadurBounds::inapplicable(),
    };
    let ln_upper = ln_pmf + ((mf + 1.0) * (1.0 - p)).ln() - denom.ln();
    let gap = mf - nf * p;
    let correction = 1.0 + nf * p * (1.0 - p) / (gap * gap);
    BahadurBounds {
        applicable: true,
        upper: Some(ProbabilityValue::from_ln(ln_upper)),
        lower: Some(ProbabilityValue::from_ln(ln_upper - correction.ln())),
        correction: Some(correction),
    }
}

fn exact_bounds(n: u64, m: u64, p: &BigRational) -> BahadurBounds {
    let int = |v: u64| BigRational::from_integer(BigInt::from(v));
    let one = BigRational::one();
    let q = &one - p;
    let pmf = match binom_pmf_exact(n, m, p) {
        Ok(v) => v,
        Err(_) => return BahadurBounds::inapplicable(),
    };
    let denom = int(m + 1) - int(n + 1) * p;
    let upper = pmf * int(m + 1) * &q / denom;
    let gap = int(m) - int(n) * p;
    let correction = one + int(n) * p * &q / (&gap * &gap);
    let lower = &upper / &correction;
    BahadurBounds {
        applicable: true,
        upper: Some(ProbabilityValue::from_exact(upper)),
        lower: Some(ProbabilityValue::from_exact(lower)),
        correction: Some(rational_to_f64(&correction)),
    }
}

/// Which term of the failure probability a correction factor refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrectionTerm {
    /// The unequivocal-failure term `B_M(m_min)`.
    FirstTerm,
    /// The guess term `B_M(M - m_min + 1)`.
    SecondTerm,
    /// `B_M((M+1)/2)` at best resolution.
    BestResolution,
}

/// Large-`M` form of Bahadur's bracket for the tails in the failure
/// probability, in terms of `ε`, `M` and the resolution `R`.
pub fn correction_factor(eps: &Polarization, m: u64, r: f64, which: CorrectionTerm) -> Result<f64> {
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let e = eps.value();
    let root = (m as f64).sqrt();
    let spread = r.ceil() / (2.0 * root);
    let denom = match which {
        CorrectionTerm::BestResolution => 1.0 / root + root * e,
        CorrectionTerm::FirstTerm => spread + root * e,
        CorrectionTerm::SecondTerm => 1.0 / root - spread + root * e,
    };
    if denom == 0.0 {
        return Err(Error::ZeroDenominator("correction factor"));
    }
    Ok(1.0 + (1.0 - e * e) / (denom * denom))
}

/// `√(2/(πM)) · (1+ε)/(2ε) · (1-ε²)^(M/2)`.
///
/// This keeps only what survives an `M`-th root: its ratio to the exact
/// best-resolution value tends to `√((1+ε)/(1-ε))`, not 1, while the
/// relative error of its logarithm vanishes like `1/M`.
pub fn pfail_asymptotic(eps: &Polarization, m: u64) -> Result<FailureProbability> {
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let e = eps.value();
    if e == 0.0 {
        return Err(Error::ZeroDenominator("asymptotic failure probability at ε = 0"));
    }
    let mf = m as f64;
    let ln = 0.5 * (2.0 / (std::f64::consts::PI * mf)).ln() + ((1.0 + e) / (2.0 * e)).ln()
        + 0.5 * mf * (-e * e).ln_1p();
    Ok(ProbabilityValue::from_ln(ln))
}
