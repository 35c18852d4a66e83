//! Binomial probability kernels.
//!
//! Every quantity has two routes: an exact one over arbitrary-precision
//! rationals (used to assert identities with `==`) and a floating one that
//! works in natural-log space so that tails as small as `2^-1000000` stay
//! representable. [`ProbabilityValue`] carries whichever representations are
//! available.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// A probability in one or more representations.
///
/// `float` is always present (it may underflow to zero); `log_value` keeps the
/// natural log when the float alone would lose the magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityValue {
    pub exact: Option<BigRational>,
    pub float: f64,
    pub log_value: Option<f64>,
}

/// Probabilities of failure are ordinary probabilities restricted to `[0, 1/2]`
/// by the models that produce them.
pub type FailureProbability = ProbabilityValue;

impl ProbabilityValue {
    pub fn from_exact(value: BigRational) -> Self {
        let float = rational_to_f64(&value);
        let log_value = Some(ln_rational(&value));
        Self {
            exact: Some(value),
            float,
            log_value,
        }
    }

    pub fn from_ln(ln: f64) -> Self {
        Self {
            exact: None,
            float: ln.exp(),
            log_value: Some(ln),
        }
    }

    pub fn from_f64(value: f64) -> Self {
        Self {
            exact: None,
            float: value,
            log_value: Some(value.ln()),
        }
    }

    pub fn zero() -> Self {
        Self::from_exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_exact(BigRational::one())
    }

    pub fn value(&self) -> f64 {
        self.float
    }

    /// Natural log of the value; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        match self.log_value {
            Some(l) => l,
            None => self.float.ln(),
        }
    }
}

impl fmt::Display for ProbabilityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "{}", self.float),
        }
    }
}

/// A success probability supplied either exactly or as a double.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbArg {
    Exact(BigRational),
    Float(f64),
}

impl ProbArg {
    pub fn as_f64(&self) -> f64 {
        match self {
            ProbArg::Exact(r) => rational_to_f64(r),
            ProbArg::Float(x) => *x,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ProbArg::Exact(r) => {
                if r.is_negative() || r > &BigRational::one() {
                    return Err(Error::ProbabilityOutOfRange(rational_to_f64(r)));
                }
                Ok(())
            }
            ProbArg::Float(x) => check_p(*x),
        }
    }
}

impl From<f64> for ProbArg {
    fn from(x: f64) -> Self {
        ProbArg::Float(x)
    }
}

impl From<BigRational> for ProbArg {
    fn from(r: BigRational) -> Self {
        ProbArg::Exact(r)
    }
}

/// `Σ_{k=m}^{n} C(n,k) p^k (1-p)^(n-k)`. `m = n + 1` is the empty sum.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialTailQuery {
    pub n: u64,
    pub m: u64,
    pub p: ProbArg,
}

impl BinomialTailQuery {
    pub fn new(n: u64, m: u64, p: impl Into<ProbArg>) -> Result<Self> {
        let p = p.into();
        p.validate()?;
        if m > n + 1 {
            return Err(Error::IndexOutOfRange { k: m, n: n + 1 });
        }
        Ok(Self { n, m, p })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(())
}

fn check_rational_p(p: &BigRational) -> Result<()> {
    ProbArg::Exact(p.clone()).validate()
}

// ---------------------------------------------------------------------------
// exact path

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c *= n - i;
        c /= i + 1;
    }
    c
}

/// Splits `p = a/b` into `(a, b - a, b)` as unsigned integers.
fn split_rational(p: &BigRational) -> (BigUint, BigUint, BigUint) {
    let a = p.numer().magnitude().clone();
    let b = p.denom().magnitude().clone();
    let c = &b - &a;
    (a, c, b)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(
        BigInt::from_biguint(Sign::Plus, num),
        BigInt::from_biguint(Sign::Plus, den),
    )
}

pub fn binom_pmf_exact(n: u64, k: u64, p: &BigRational) -> Result<BigRational> {
    check_rational_p(p)?;
    if k > n {
        return Err(Error::IndexOutOfRange { k, n });
    }
    let (a, c, b) = split_rational(p);
    let num = binomial(n, k) * num_traits::pow(a, k as usize) * num_traits::pow(c, (n - k) as usize);
    Ok(ratio(num, num_traits::pow(b, n as usize)))
}

pub fn binom_tail_exact(n: u64, m: u64, p: &BigRational) -> Result<BigRational> {
    check_rational_p(p)?;
    if m > n + 1 {
        return Err(Error::IndexOutOfRange { k: m, n: n + 1 });
    }
    if m == 0 {
        return Ok(BigRational::one());
    }
    if m > n || p.is_zero() {
        return Ok(BigRational::zero());
    }
    if p.is_one() {
        return Ok(BigRational::one());
    }
    let (a, c, b) = split_rational(p);
    // term_k = C(n,k) a^k c^(n-k); term_{k+1} = term_k (n-k) a / ((k+1) c),
    // and the division is exact.
    let mut term = binomial(n, m) * num_traits::pow(a.clone(), m as usize)
        * num_traits::pow(c.clone(), (n - m) as usize);
    let mut sum = term.clone();
    for k in m..n {
        term = term * (n - k) * &a;
        let (q, r) = term.div_rem(&(&c * (k + 1)));
        debug_assert!(r.is_zero());
        term = q;
        sum += &term;
    }
    Ok(ratio(sum, num_traits::pow(b, n as usize)))
}

/// Regularized incomplete beta `I_p(x, y)` for integer arguments, exactly.
pub fn incomplete_beta_exact(p: &BigRational, x: u64, y: u64) -> Result<BigRational> {
    check_beta_args(x, y)?;
    binom_tail_exact(x + y - 1, x, p)
}

// ---------------------------------------------------------------------------
// floating path

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k <= 64 {
        return (1..=k)
            .map(|i| ((n - k + i) as f64 / i as f64).ln())
            .sum();
    }
    if n <= 1000 {
        // C(1000, 500) < 1e300, so the running product never overflows.
        let mut c = 1.0f64;
        for i in 1..=k {
            c = c * (n - k + i) as f64 / i as f64;
        }
        return c.ln();
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln n!`: direct product below 171, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 171 {
        let mut f = 1.0f64;
        for i in 2..=n {
            f *= i as f64;
        }
        return f.ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

fn scaled_ln(count: u64, ln_x: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * ln_x
    }
}

fn ln_pmf_unchecked(n: u64, k: u64, p: f64) -> f64 {
    ln_choose(n, k) + scaled_ln(k, p.ln()) + scaled_ln(n - k, (-p).ln_1p())
}

/// `ln[C(n,k) p^k (1-p)^(n-k)]`.
pub fn ln_binom_pmf(n: u64, k: u64, p: f64) -> Result<f64> {
    check_p(p)?;
    if k > n {
        return Err(Error::IndexOutOfRange { k, n });
    }
    Ok(ln_pmf_unchecked(n, k, p))
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Terms below this fraction of the running sum are dropped.
const TAIL_CUTOFF: f64 = 1e-18;

/// `ln Σ_{k=m}^{n} C(n,k) p^k (1-p)^(n-k)`.
///
/// Starts at the largest term in `[m, n]` (the mode, or `m` if the mode lies
/// below it) and walks outward with the term-ratio recurrence, so only the
/// terms that matter are visited even for `n` in the tens of millions.
pub fn ln_binom_tail(n: u64, m: u64, p: f64) -> Result<f64> {
    check_p(p)?;
    if m > n + 1 {
        return Err(Error::IndexOutOfRange { k: m, n: n + 1 });
    }
    if m == 0 {
        return Ok(0.0);
    }
    if m > n || p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(0.0);
    }

    let odds = p / (1.0 - p);
    let mode = (((n + 1) as f64 * p).floor() as u64).min(n);
    let start = mode.max(m);
    let ln_start = ln_pmf_unchecked(n, start, p);

    let mut acc = CompensatedSum::default();
    acc.add(1.0);

    let mut term = 1.0f64;
    for k in start..n {
        term *= (n - k) as f64 / (k + 1) as f64 * odds;
        if term < acc.total() * TAIL_CUTOFF {
            break;
        }
        acc.add(term);
    }

    term = 1.0;
    for k in (m..start).rev() {
        term *= (k + 1) as f64 / ((n - k) as f64 * odds);
        if term < acc.total() * TAIL_CUTOFF {
            break;
        }
        acc.add(term);
    }

    Ok(ln_start + acc.total().ln())
}

/// `ln I_p(x, y)` for integer arguments.
pub fn ln_incomplete_beta(p: f64, x: u64, y: u64) -> Result<f64> {
    check_beta_args(x, y)?;
    ln_binom_tail(x + y - 1, x, p)
}

fn check_beta_args(x: u64, y: u64) -> Result<()> {
    if x == 0 || y == 0 {
        return Err(Error::InvalidArgument(format!(
            "incomplete beta needs positive integer arguments, got ({x}, {y})"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dispatching entry points

pub fn binom_pmf(n: u64, k: u64, p: &ProbArg) -> Result<ProbabilityValue> {
    p.validate()?;
    match p {
        ProbArg::Exact(r) => binom_pmf_exact(n, k, r).map(ProbabilityValue::from_exact),
        ProbArg::Float(x) => ln_binom_pmf(n, k, *x).map(ProbabilityValue::from_ln),
    }
}

pub fn binom_tail(q: &BinomialTailQuery) -> Result<ProbabilityValue> {
    match &q.p {
        ProbArg::Exact(r) => binom_tail_exact(q.n, q.m, r).map(ProbabilityValue::from_exact),
        ProbArg::Float(x) => ln_binom_tail(q.n, q.m, *x).map(ProbabilityValue::from_ln),
    }
}

pub fn incomplete_beta(p: &ProbArg, x: u64, y: u64) -> Result<ProbabilityValue> {
    check_beta_args(x, y)?;
    binom_tail(&BinomialTailQuery::new(x + y - 1, x, p.clone())?)
}

// ---------------------------------------------------------------------------
// rational <-> float helpers

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Nearest double to a rational (within one ulp); underflows to zero.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    // Scale so the integer quotient carries 64 significant bits.
    let shift = 64 - (num.bits() as i64 - den.bits() as i64);
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let mag = ldexp(q.to_f64().unwrap_or(f64::INFINITY), -shift);
    if r.is_negative() {
        -mag
    } else {
        mag
    }
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let drop = bits - 64;
    let top = (x >> drop as usize).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + drop as f64 * std::f64::consts::LN_2
}

/// Natural log of a non-negative rational; `-inf` for zero.
pub fn ln_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_biguint(r.numer().magnitude()) - ln_biguint(r.denom().magnitude())
}

/// `ln(e^a + e^b)` without overflow; handles `-inf` operands.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
