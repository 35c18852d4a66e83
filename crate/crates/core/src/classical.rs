//! Failure probabilities `F(Q)` of classical probabilistic competitors that
//! spend `Q` oracle queries.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::prob::{rat, rational_to_f64};
use crate::{Error, FailureProbability, ProbabilityValue, Result};

/// Largest argument-register width for which `N = 2^n` is handled.
pub const MAX_DJ_BITS: u32 = 1000;

/// Exact products beyond this many factors are skipped in favour of logs.
const EXACT_FACTOR_LIMIT: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalModel {
    /// `F(Q) = c^-Q`.
    Exponential { c: f64 },
    /// The Deutsch-Jozsa sampling algorithm on `n`-bit arguments, with
    /// balanced functions drawn with probability `p_bal`.
    DeutschJozsaExact { n: u32, p_bal: BigRational },
    /// `F(Q) = 2^-Q`, the `Q ≪ N/2` limit of the exact model.
    DeutschJozsaApprox,
}

impl ClassicalModel {
    pub fn exponential(c: f64) -> Result<Self> {
        check_base(c)?;
        Ok(Self::Exponential { c })
    }

    pub fn dj_exact(n: u32, p_bal: BigRational) -> Result<Self> {
        check_dj(n, &p_bal)?;
        Ok(Self::DeutschJozsaExact { n, p_bal })
    }

    /// Base `c` of the exponential law the model follows (exactly or
    /// asymptotically).
    pub fn base(&self) -> f64 {
        match self {
            Self::Exponential { c } => *c,
            Self::DeutschJozsaExact { .. } | Self::DeutschJozsaApprox => 2.0,
        }
    }

    pub fn is_deutsch_jozsa(&self) -> bool {
        !matches!(self, Self::Exponential { .. })
    }

    pub fn failure(&self, queries: u64) -> Result<FailureProbability> {
        match self {
            Self::Exponential { c } => cf_exponential(*c, queries),
            Self::DeutschJozsaExact { n, p_bal } => {
                if queries <= EXACT_FACTOR_LIMIT {
                    cf_dj_exact(*n, queries, p_bal)
                } else {
                    ln_cf_dj_exact(*n, queries, rational_to_f64(p_bal)).map(ProbabilityValue::from_ln)
                }
            }
            Self::DeutschJozsaApprox => cf_dj_approx(queries),
        }
    }

    /// `ln F(Q)`, never materialising large exact values.
    pub fn ln_failure(&self, queries: u64) -> Result<f64> {
        match self {
            Self::Exponential { c } => {
                check_base(*c)?;
                check_queries(queries)?;
                Ok(-(queries as f64) * c.ln())
            }
            Self::DeutschJozsaExact { n, p_bal } => ln_cf_dj_exact(*n, queries, rational_to_f64(p_bal)),
            Self::DeutschJozsaApprox => {
                check_queries(queries)?;
                Ok(-(queries as f64) * std::f64::consts::LN_2)
            }
        }
    }
}

fn check_base(c: f64) -> Result<()> {
    if !c.is_finite() || c <= 1.0 {
        return Err(Error::InvalidBase(c));
    }
    Ok(())
}

fn check_queries(q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidArgument("query count must be positive".into()));
    }
    Ok(())
}

fn check_dj(n: u32, p_bal: &BigRational) -> Result<()> {
    if n == 0 || n > MAX_DJ_BITS {
        return Err(Error::InvalidArgument(format!(
            "argument width n = {n} must lie in [1, {MAX_DJ_BITS}]"
        )));
    }
    if p_bal.is_negative() || p_bal > &BigRational::one() {
        return Err(Error::ProbabilityOutOfRange(rational_to_f64(p_bal)));
    }
    Ok(())
}

/// `1/c^Q`; exact when `c` is a modest integer.
pub fn cf_exponential(c: f64, queries: u64) -> Result<FailureProbability> {
    check_base(c)?;
    check_queries(queries)?;
    let ln = -(queries as f64) * c.ln();
    if c.fract() == 0.0 && c < 2f64.powi(53) && -ln / std::f64::consts::LN_2 <= 65_536.0 {
        let base = BigInt::from(c as u64);
        let den = num_traits::pow(base, queries as usize);
        return Ok(ProbabilityValue::from_exact(BigRational::new(BigInt::one(), den)));
    }
    Ok(ProbabilityValue::from_ln(ln))
}

/// Classical Deutsch-Jozsa failure with `M` distinct queries:
/// `p_bal · 2·C(N-M, N/2-M) / C(N, N/2)`, zero once `M > N/2`.
///
/// The binomial ratio telescopes to `Π_{i<M} (N/2 - i)/(N - i)`.
pub fn cf_dj_exact(n: u32, queries: u64, p_bal: &BigRational) -> Result<FailureProbability> {
    check_dj(n, p_bal)?;
    check_queries(queries)?;
    let big_n = BigUint::one() << n as usize;
    let half = &big_n >> 1usize;
    if BigUint::from(queries) > half {
        return Ok(ProbabilityValue::zero());
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..queries {
        num *= &half - i;
        den *= &big_n - i;
    }
    let ratio = BigRational::new(BigInt::from(num), BigInt::from(den));
    Ok(ProbabilityValue::from_exact(p_bal * rat(2, 1) * ratio))
}

/// `ln` of [`cf_dj_exact`] with a floating `p_bal`.
pub fn ln_cf_dj_exact(n: u32, queries: u64, p_bal: f64) -> Result<f64> {
    if n == 0 || n > MAX_DJ_BITS {
        return Err(Error::InvalidArgument(format!(
            "argument width n = {n} must lie in [1, {MAX_DJ_BITS}]"
        )));
    }
    if !(0.0..=1.0).contains(&p_bal) {
        return Err(Error::ProbabilityOutOfRange(p_bal));
    }
    check_queries(queries)?;
    let big_n = 2f64.powi(n as i32);
    if queries as f64 > big_n / 2.0 || p_bal == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    // (N/2 - i)/(N - i) = ½·(1 - i/(N - i))
    let mut ln = (2.0 * p_bal).ln();
    for i in 0..queries {
        let i = i as f64;
        ln += (-i / (big_n - i)).ln_1p() - std::f64::consts::LN_2;
    }
    Ok(ln)
}

/// `1/2^M`.
pub fn cf_dj_approx(queries: u64) -> Result<FailureProbability> {
    check_queries(queries)?;
    if queries <= 1 << 20 {
        let den = BigInt::one() << queries as usize;
        return Ok(ProbabilityValue::from_exact(BigRational::new(BigInt::one(), den)));
    }
    Ok(ProbabilityValue::from_ln(-(queries as f64) * std::f64::consts::LN_2))
}

/// Stirling-formula estimate of `C(N-M, N/2-M) / C(N, N/2)`, the
/// intermediate step between the exact count and `2^-M`. Diagnostic only.
pub fn dj_ratio_stirling(n: u32, queries: u64) -> Result<f64> {
    check_queries(queries)?;
    let big_n = 2f64.powi(n as i32);
    let m = queries as f64;
    let half = big_n / 2.0;
    if m >= half {
        return Err(Error::InvalidArgument(format!(
            "Stirling estimate needs M < N/2, got M = {queries}, N = {big_n}"
        )));
    }
    let ln = 0.5 * (((big_n - m) * half) / (big_n * (half - m))).ln()
        + m * ((half - m) / (big_n - m)).ln()
        + big_n * ((big_n - m) / big_n).ln()
        + half * (half / (half - m)).ln();
    Ok(ln.exp())
}

/// Exact failure probability as a rational, for tests and reports.
pub fn cf_dj_exact_rational(n: u32, queries: u64, p_bal: &BigRational) -> Result<BigRational> {
    cf_dj_exact(n, queries, p_bal).map(|v| v.exact.unwrap_or_else(BigRational::zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> BigRational {
        rat(1, 2)
    }

    /// Every balanced support × every `M`-subset of arguments, plus the two
    /// constant functions (which never fail).
    fn brute_force(n: u32, m: u64) -> BigRational {
        let big_n = 1u32 << n;
        let full: u32 = (1 << big_n) - 1;
        let subsets: Vec<u32> = (0..=full).filter(|s| s.count_ones() as u64 == m).collect();
        let supports: Vec<u32> = (0..=full).filter(|s| s.count_ones() == big_n / 2).collect();
        let mut fails = 0u64;
        for &b in &supports {
            for &s in &subsets {
                if s & b == 0 || s & !b & full == 0 {
                    fails += 1;
                }
            }
        }
        let balanced = rat(fails as i64, (supports.len() * subsets.len()) as i64);
        half() * balanced
    }

    #[test]
    fn exponential_examples() {
        assert_eq!(cf_exponential(2.0, 3).unwrap().exact.unwrap(), rat(1, 8));
        assert_eq!(cf_exponential(2.0, 1).unwrap().exact.unwrap(), rat(1, 2));
        let e = cf_exponential(std::f64::consts::E, 10).unwrap();
        assert!(e.exact.is_none());
        assert!((e.float - 4.539_992_976_248_485e-5).abs() < 1e-18);
        assert!(matches!(cf_exponential(1.0, 3), Err(Error::InvalidBase(_))));
        let tiny = cf_exponential(3.0, 10_000_000).unwrap();
        assert_eq!(tiny.float, 0.0);
        assert!((tiny.ln() + 1e7 * 3f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn dj_exact_examples() {
        assert_eq!(cf_dj_exact_rational(2, 2, &half()).unwrap(), rat(1, 6));
        assert_eq!(cf_dj_exact_rational(2, 3, &half()).unwrap(), rat(0, 1));
        assert_eq!(cf_dj_exact_rational(1, 1, &half()).unwrap(), rat(1, 2));
        assert_eq!(cf_dj_exact_rational(3, 9, &half()).unwrap(), rat(0, 1));
        assert!(cf_dj_exact(0, 1, &half()).is_err());
        assert!(cf_dj_exact(3, 1, &rat(3, 2)).is_err());
    }

    #[test]
    fn dj_exact_matches_enumeration_small() {
        for n in 1..=3u32 {
            for m in 1..=(1u64 << (n - 1)) + 1 {
                assert_eq!(cf_dj_exact_rational(n, m, &half()).unwrap(), brute_force(n, m), "n={n} M={m}");
            }
        }
    }

    #[test]
    fn dj_approx_examples() {
        assert_eq!(cf_dj_approx(2).unwrap().exact.unwrap(), rat(1, 4));
        assert!((cf_dj_approx(20).unwrap().float - 9.5367431640625e-7).abs() < 1e-20);
        let exact = cf_dj_exact(20, 10, &half()).unwrap().float;
        let approx = cf_dj_approx(10).unwrap().float;
        assert!(((exact - approx) / approx).abs() < 1e-4);
    }

    #[test]
    fn log_path_matches_exact() {
        for (n, m) in [(3u32, 2u64), (8, 50), (20, 10), (20, 1000), (12, 2048)] {
            let exact = cf_dj_exact(n, m, &half()).unwrap();
            let ln = ln_cf_dj_exact(n, m, 0.5).unwrap();
            assert!((ln - exact.ln()).abs() < 1e-10 * ln.abs().max(1.0), "n={n} M={m}");
        }
        assert_eq!(ln_cf_dj_exact(4, 9, 0.5).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn non_increasing_in_queries_and_converges_to_approx() {
        let mut prev = rat(1, 1);
        for m in 1..=129 {
            let v = cf_dj_exact_rational(8, m, &half()).unwrap();
            assert!(v <= prev);
            assert!(v <= half());
            prev = v;
        }
        assert_eq!(prev, rat(0, 1));
        let mut last = f64::INFINITY;
        for n in [8u32, 12, 16, 20] {
            let dev = (cf_dj_exact(n, 10, &half()).unwrap().float / cf_dj_approx(10).unwrap().float - 1.0).abs();
            assert!(dev < last);
            last = dev;
        }
    }

    #[test]
    fn stirling_estimate_tracks_exact_ratio() {
        let exact = cf_dj_exact(20, 10, &rat(1, 2)).unwrap().float;
        let est = dj_ratio_stirling(20, 10).unwrap();
        assert!((est / exact - 1.0).abs() < 1e-4);
        assert!(dj_ratio_stirling(3, 4).is_err());
    }

    #[test]
    fn model_dispatch() {
        let m = ClassicalModel::dj_exact(20, half()).unwrap();
        assert!((m.ln_failure(10).unwrap() - m.failure(10).unwrap().ln()).abs() < 1e-12);
        assert_eq!(m.base(), 2.0);
        let e = ClassicalModel::exponential(4.0).unwrap();
        assert_eq!(e.failure(2).unwrap().exact.unwrap(), rat(1, 16));
        assert!(ClassicalModel::exponential(0.5).is_err());
        assert_eq!(ClassicalModel::DeutschJozsaApprox.ln_failure(3).unwrap(), -3.0 * std::f64::consts::LN_2);
    }
}
