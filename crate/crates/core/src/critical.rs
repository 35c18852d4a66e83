//! Critical polarization: the `ε` at which the ensemble failure probability
//! equals that of a classical competitor given the same total number of
//! oracle queries `Q = M·q`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::ClassicalModel;
use crate::failure::{ln_pfail_best, ln_pfail_general, pfail_general, EnsembleSpec, Polarization};
use crate::prob::rational_to_f64;
use crate::{Error, FailureProbability, Result};

/// Bisection stops once the bracket on `ε` is this narrow.
pub const SOLVER_TOLERANCE: f64 = 1e-12;

/// Largest `M` for which the exact-rational residual check is attempted.
pub const EXACT_CHECK_LIMIT: u64 = 1000;

/// Fitted constant of the intermediate-size Deutsch-Jozsa formula, `K = 2.44π`.
pub const DJ_MODERATE_CONSTANT: f64 = 2.44 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Numeric,
    AsymptoticGeneral,
    DjBestres,
    DjModerate,
    Limit,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Numeric,
        Method::AsymptoticGeneral,
        Method::DjBestres,
        Method::DjModerate,
        Method::Limit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Numeric => "numeric",
            Method::AsymptoticGeneral => "asymptotic_general",
            Method::DjBestres => "dj_bestres",
            Method::DjModerate => "dj_moderate",
            Method::Limit => "limit",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "numeric" => Method::Numeric,
            "asymptotic_general" | "asymptotic" | "general" => Method::AsymptoticGeneral,
            "dj_bestres" | "bestres" => Method::DjBestres,
            "dj_moderate" | "moderate" => Method::DjModerate,
            "limit" => Method::Limit,
            other => return Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        })
    }
}

/// `R(M) = max(2, R₀·M^α)` with `0 ≤ α < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionScaling {
    r0: f64,
    alpha: f64,
}

impl ResolutionScaling {
    pub fn new(r0: f64, alpha: f64) -> Result<Self> {
        if !r0.is_finite() || r0 <= 0.0 {
            return Err(Error::InvalidArgument(format!("R0 = {r0} must be positive")));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in [0, 1)")));
        }
        Ok(Self { r0, alpha })
    }

    pub fn best() -> Self {
        Self { r0: 2.0, alpha: 0.0 }
    }

    /// `R = √M`.
    pub fn sqrt_m() -> Self {
        Self { r0: 1.0, alpha: 0.5 }
    }

    pub fn fixed(r: f64) -> Result<Self> {
        Self::new(r, 0.0)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn resolution(&self, m: u64) -> f64 {
        (self.r0 * (m as f64).powf(self.alpha)).max(2.0)
    }
}

/// Outcome of re-evaluating a numeric solve in rational arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCheck {
    /// `pfail(ε) - F(Mq)` at the returned `ε`, evaluated exactly then rounded.
    pub residual: f64,
    /// `pfail - F` is non-negative at the bracket's low end and non-positive
    /// at its high end.
    pub sign_change: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPolarizationPoint {
    pub m: u64,
    pub eps: f64,
    pub method: Method,
    /// Resolution used by a numeric solve.
    pub resolution: Option<f64>,
    /// `ln pfail(ε) - ln F(Mq)` for numeric solves.
    pub residual: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub exact_check: Option<ExactCheck>,
}

impl CriticalPolarizationPoint {
    fn closed_form(m: u64, eps: f64, method: Method) -> Self {
        Self {
            m,
            eps,
            method,
            resolution: None,
            residual: None,
            bracket: None,
            exact_check: None,
        }
    }
}

/// Bisection for the root of a function that decreases in `x` on `[lo, hi]`.
///
/// Returns the final bracket `(lo, hi)` with `f(lo) > 0 ≥ f(hi)`.
pub fn bisect_decreasing(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Solves `pfail(ε, M, m_min) = F(Mq)` for `ε` by bisection in log space.
pub fn solve_critical(
    model: &ClassicalModel,
    q: u64,
    m: u64,
    scaling: &ResolutionScaling,
) -> Result<CriticalPolarizationPoint> {
    if q == 0 {
        return Err(Error::InvalidArgument("queries per member q must be positive".into()));
    }
    let r = scaling.resolution(m);
    let spec = EnsembleSpec::new(m, r)?;
    let ln_target = model.ln_failure(m * q)?;
    let ln_half = -std::f64::consts::LN_2;

    let residual_at = |eps: f64| ln_pfail_general(eps, &spec).map(|v| v - ln_target);

    let (lo, hi) = if ln_target >= ln_half {
        (0.0, 0.0)
    } else if ln_target == f64::NEG_INFINITY {
        (1.0, 1.0)
    } else {
        bisect_decreasing(
            |eps| residual_at(eps).unwrap_or(f64::NAN),
            0.0,
            1.0,
            SOLVER_TOLERANCE,
        )
    };
    let eps = if lo == hi { lo } else { 0.5 * (lo + hi) };
    let residual = residual_at(eps)?;
    Ok(CriticalPolarizationPoint {
        m,
        eps,
        method: Method::Numeric,
        resolution: Some(r),
        residual: Some(residual),
        bracket: Some((lo, hi)),
        exact_check: None,
    })
}

/// [`solve_critical`] followed, for `M ≤ 1000` and models with an exact
/// `F(Mq)`, by a rational re-evaluation at the bracket ends and midpoint.
pub fn solve_critical_verified(
    model: &ClassicalModel,
    q: u64,
    m: u64,
    scaling: &ResolutionScaling,
) -> Result<CriticalPolarizationPoint> {
    let mut point = solve_critical(model, q, m, scaling)?;
    if m <= EXACT_CHECK_LIMIT {
        if let Some(target) = model.failure(m * q)?.exact {
            point.exact_check = Some(exact_check(&point, &target)?);
        }
    }
    Ok(point)
}

fn exact_check(point: &CriticalPolarizationPoint, target: &BigRational) -> Result<ExactCheck> {
    let spec = EnsembleSpec::new(point.m, point.resolution.unwrap_or(2.0))?;
    let gap = |eps: f64| -> Result<BigRational> {
        let e = BigRational::from_float(eps)
            .ok_or_else(|| Error::InvalidArgument(format!("ε = {eps} is not finite")))?;
        let value = pfail_general(&Polarization::exact(e)?, &spec)?;
        Ok(value.exact.expect("rational ε yields an exact value") - target)
    };
    let (lo, hi) = point.bracket.unwrap_or((point.eps, point.eps));
    let zero = BigRational::from_integer(0.into());
    let sign_change = if lo == hi {
        // Endpoint solutions: F ≥ ½ pins ε = 0, F = 0 pins ε = 1.
        let g = gap(lo)?;
        (lo == 0.0 && g <= zero) || (lo == 1.0 && g == zero)
    } else {
        gap(lo)? >= zero && gap(hi)? <= zero
    };
    Ok(ExactCheck {
        residual: rational_to_f64(&gap(point.eps)?),
        sign_change,
    })
}

fn eps_from_ln_ratio(ln_ratio: f64, what: &'static str) -> Result<f64> {
    if ln_ratio > 0.0 {
        return Err(Error::NoRealSolution {
            what,
            detail: format!("1 - ε² = exp({ln_ratio:.6}) exceeds 1"),
        });
    }
    Ok((-ln_ratio.exp_m1()).sqrt())
}

/// `ε(M) = √(1 - [M·F(Mq)²]^(1/M))`, from `ln F` to survive underflow.
pub fn eps_asymptotic_general(f_mq: &FailureProbability, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mf = m as f64;
    eps_from_ln_ratio(mf.ln() / mf + 2.0 * f_mq.ln() / mf, "eps_asymptotic_general")
}

/// `ε(M) = √(1 - M^(1/M)/c^(2q))` for `F(Q) = c^-Q`.
pub fn eps_exponential(c: f64, q: u64, m: u64) -> Result<f64> {
    if c.is_nan() || c <= 1.0 {
        return Err(Error::InvalidBase(c));
    }
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mf = m as f64;
    eps_from_ln_ratio(mf.ln() / mf - 2.0 * q as f64 * c.ln(), "eps_exponential")
}

/// Deutsch-Jozsa at best resolution: [`eps_exponential`] with `c = 2, q = 1`.
pub fn eps_dj_bestres(m: u64) -> Result<f64> {
    eps_exponential(2.0, 1, m)
}

/// `ε(M) = √(1 - (2.44πM)^(1/M)/4)`, the intermediate-size Deutsch-Jozsa fit.
pub fn eps_dj_moderate(m: u64) -> Result<f64> {
    eps_dj_moderate_with(DJ_MODERATE_CONSTANT, m)
}

pub fn eps_dj_moderate_with(constant: f64, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mf = m as f64;
    eps_from_ln_ratio((constant * mf).ln() / mf - 2.0 * std::f64::consts::LN_2, "eps_dj_moderate")
}

/// `M → ∞` limit `√(1 - c^(-2q))`.
pub fn eps_limit(c: f64, q: u64) -> Result<f64> {
    if c.is_nan() || c <= 1.0 {
        return Err(Error::InvalidBase(c));
    }
    eps_from_ln_ratio(-2.0 * q as f64 * c.ln(), "eps_limit")
}

/// `M₀` and `ε₀ > 0` with `ε(M) ≥ ε₀` for every `M > M₀` under `F(Q) = c^-Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBound {
    pub m0: u64,
    pub eps0: f64,
    /// Root of `pfail_best(ε, M)·c^(qM) = 1`.
    pub eps_prime: f64,
    /// Ensemble size at which `eps_prime` was solved.
    pub solved_at: u64,
    /// `√(1 - 2c^(-2q)/3)`.
    pub eps_cap: f64,
}

pub fn threshold_bound(c: f64, q: u64) -> Result<ThresholdBound> {
    if !c.is_finite() || c <= 1.0 {
        return Err(Error::InvalidBase(c));
    }
    if q == 0 {
        return Err(Error::InvalidArgument("queries per member q must be positive".into()));
    }
    let ln_c = c.ln();
    let qf = q as f64;
    let m0 = ((std::f64::consts::LN_2 / (qf * ln_c)).ceil() as u64).max(1);
    // At M₀ the ratio at ε = 0 is c^(qM₀)/2 ≥ 1; when that is an equality the
    // root sits at ε = 0, so move to the first M where the ratio exceeds 1.
    let solved_at = if qf * m0 as f64 * ln_c - std::f64::consts::LN_2 <= 1e-12 {
        m0 + 1
    } else {
        m0
    };
    let ln_target = -qf * solved_at as f64 * ln_c;
    let (lo, hi) = bisect_decreasing(
        |eps| ln_pfail_best(eps, solved_at).map_or(f64::NAN, |v| v - ln_target),
        0.0,
        1.0,
        SOLVER_TOLERANCE,
    );
    let eps_prime = 0.5 * (lo + hi);
    let eps_cap = (1.0 - 2.0 * (-2.0 * qf * ln_c).exp() / 3.0).sqrt();
    Ok(ThresholdBound {
        m0,
        eps0: eps_prime.min(eps_cap),
        eps_prime,
        solved_at,
        eps_cap,
    })
}

/// The simpler bound quoted alongside the exponential model:
/// `ε ≥ √(1 - 1/c²)` once `M ≥ 2/ln c`. Returns `(2/ln c, √(1 - 1/c²))`.
pub fn simple_threshold_bound(c: f64) -> Result<(f64, f64)> {
    if c.is_nan() || c <= 1.0 {
        return Err(Error::InvalidBase(c));
    }
    Ok((2.0 / c.ln(), (1.0 - 1.0 / (c * c)).sqrt()))
}

/// `ln[pfail_best(ε, M) / F(Mq)]` for `F(Q) = c^-Q`.
pub fn ln_failure_ratio(eps: f64, m: u64, c: f64, q: u64) -> Result<f64> {
    Ok(ln_pfail_best(eps, m)? + q as f64 * m as f64 * c.ln())
}

/// One row of a critical-polarization curve; failures are kept as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub m: u64,
    pub method: Method,
    pub point: Result<CriticalPolarizationPoint>,
}

fn evaluate(
    model: &ClassicalModel,
    q: u64,
    m: u64,
    scaling: &ResolutionScaling,
    method: Method,
) -> Result<CriticalPolarizationPoint> {
    let c = model.base();
    let eps = match method {
        Method::Numeric => return solve_critical(model, q, m, scaling),
        Method::AsymptoticGeneral => eps_asymptotic_general(&model.failure(m * q)?, m)?,
        Method::DjBestres => eps_exponential(c, q, m)?,
        Method::DjModerate => {
            if !model.is_deutsch_jozsa() || q != 1 {
                return Err(Error::InvalidArgument(
                    "dj_moderate applies only to the Deutsch-Jozsa models with q = 1".into(),
                ));
            }
            eps_dj_moderate(m)?
        }
        Method::Limit => eps_limit(c, q)?,
    };
    Ok(CriticalPolarizationPoint::closed_form(m, eps, method))
}

/// Evaluates every `(M, method)` pair, in parallel, ordered by `M` then method.
pub fn curve(
    model: &ClassicalModel,
    q: u64,
    m_list: &[u64],
    scaling: &ResolutionScaling,
    methods: &[Method],
) -> Result<Vec<CurveRow>> {
    if m_list.is_empty() {
        return Err(Error::InvalidArgument("ensemble-size list is empty".into()));
    }
    let mut ms = m_list.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let mut methods = methods.to_vec();
    methods.sort_unstable();
    methods.dedup();
    let jobs: Vec<(u64, Method)> = ms
        .iter()
        .flat_map(|&m| methods.iter().map(move |&method| (m, method)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(m, method)| CurveRow {
            m,
            method,
            point: evaluate(model, q, m, scaling, method),
        })
        .collect())
}

/// Inverts the intermediate-size formula at each numerically solved `ε(M)`,
/// giving the constant `K` that would make it exact there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefitRow {
    pub m: u64,
    pub eps_numeric: f64,
    pub k_over_pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefitReport {
    pub rows: Vec<RefitRow>,
    /// Least-squares `K/π` minimising `Σ (ε_K(M) - ε_numeric(M))²`.
    pub fitted_k_over_pi: f64,
}

pub fn refit_moderate_constant(m_list: &[u64]) -> Result<RefitReport> {
    let model = ClassicalModel::DeutschJozsaApprox;
    let best = ResolutionScaling::best();
    let rows: Vec<RefitRow> = m_list
        .par_iter()
        .map(|&m| {
            let eps = solve_critical(&model, 1, m, &best)?.eps;
            let mf = m as f64;
            // (K·M)^(1/M) = 4(1 - ε²)
            let ln_k = mf * (4.0 * (1.0 - eps * eps)).ln() - mf.ln();
            Ok(RefitRow {
                m,
                eps_numeric: eps,
                k_over_pi: ln_k.exp() / std::f64::consts::PI,
            })
        })
        .collect::<Result<_>>()?;

    let sse = |k_over_pi: f64| -> f64 {
        rows.iter()
            .map(|r| match eps_dj_moderate_with(k_over_pi * std::f64::consts::PI, r.m) {
                Ok(e) => (e - r.eps_numeric).powi(2),
                Err(_) => 1.0,
            })
            .sum()
    };
    // Golden-section search on K/π ∈ [0.01, 10].
    let (mut a, mut b) = (0.01f64, 10.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-9 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if sse(c) < sse(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(RefitReport {
        rows,
        fitted_k_over_pi: 0.5 * (a + b),
    })
}
