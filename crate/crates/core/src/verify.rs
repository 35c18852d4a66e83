//! Self-checks of the identities the failure-probability machinery relies on.
//!
//! Each check recomputes a quantity two independent ways, exactly where the
//! identity is exact, and reports the first mismatch it meets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::bahadur::bahadur_bounds;
use crate::critical::{eps_asymptotic_general, eps_exponential, threshold_bound};
use crate::classical::cf_dj_approx;
use crate::failure::{
    best_step_closed_form, pfail_best, pfail_enumerated, pfail_general, pfail_threshold, EnsembleSpec,
    InputClass, Polarization,
};
use crate::prob::{binom_tail_exact, binomial, incomplete_beta, rat, BinomialTailQuery, ProbArg};
use crate::sim::{trace_circuit, trial_rng, OracleSpec};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: u64,
    pub passed: bool,
    /// First failing case, if any.
    pub detail: Option<String>,
}

type CheckFn = fn() -> Result<(u64, Option<String>)>;

const CHECKS: &[(&str, CheckFn)] = &[
    ("tail_beta_equivalence", tail_beta_equivalence),
    ("beta_symmetry", beta_symmetry),
    ("boundary_values", boundary_values),
    ("enumeration_agreement", enumeration_agreement),
    ("best_even_equals_odd", best_even_equals_odd),
    ("best_step_closed_form", best_step_closed_form_check),
    ("resolution_monotonicity", resolution_monotonicity),
    ("bahadur_sandwich", bahadur_sandwich),
    ("closed_form_agreement", closed_form_agreement),
    ("ratio_growth_below_threshold", ratio_growth_below_threshold),
    ("circuit_determinism", circuit_determinism),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(name, _)| *name).collect()
}

/// Runs the named checks (all of them when `only` is empty), in parallel.
pub fn run_checks(only: &[String]) -> Vec<CheckReport> {
    CHECKS
        .par_iter()
        .filter(|(name, _)| only.is_empty() || only.iter().any(|o| o == name))
        .map(|&(name, check)| match check() {
            Ok((cases, detail)) => CheckReport {
                name,
                cases,
                passed: detail.is_none(),
                detail,
            },
            Err(e) => CheckReport {
                name,
                cases: 0,
                passed: false,
                detail: Some(e.to_string()),
            },
        })
        .collect()
}

/// `I_p(x, y)` from its integral definition: expand `(1-t)^(y-1)`,
/// integrate term by term, divide by `B(x, y) = (x-1)!(y-1)!/(x+y-1)!`.
pub fn incomplete_beta_by_integral(p: &BigRational, x: u64, y: u64) -> BigRational {
    let mut integral = BigRational::zero();
    let mut p_pow = num_traits::pow::pow(p.clone(), x as usize);
    for j in 0..y {
        let term = BigRational::new(BigInt::from(binomial(y - 1, j)), BigInt::from(x + j)) * &p_pow;
        if j % 2 == 0 {
            integral += term;
        } else {
            integral -= term;
        }
        p_pow *= p;
    }
    // 1/B(x, y) = x·C(x+y-1, x)
    integral * BigRational::from_integer(BigInt::from(x) * BigInt::from(binomial(x + y - 1, x)))
}

fn tail_beta_equivalence() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    for n in 0..=30u64 {
        for k in 0..=16 {
            let p = rat(k, 16);
            for m in 1..=n {
                cases += 1;
                let tail = binom_tail_exact(n, m, &p)?;
                if tail != incomplete_beta_by_integral(&p, m, n - m + 1) {
                    return Ok((cases, Some(format!("n={n}, m={m}, p={p}"))));
                }
            }
        }
    }
    Ok((cases, None))
}

fn beta_symmetry() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    for x in 1..=50u64 {
        for k in 1..20 {
            let p = ProbArg::Float(k as f64 / 20.0);
            cases += 1;
            let lhs = incomplete_beta(&p, x + 1, x)?.value() + incomplete_beta(&p, x, x + 1)?.value();
            let rhs = 2.0 * incomplete_beta(&p, x, x)?.value();
            if (lhs - rhs).abs() > 1e-12 {
                return Ok((cases, Some(format!("x={x}, p={}: {lhs} vs {rhs}", k as f64 / 20.0))));
            }
        }
    }
    Ok((cases, None))
}

fn resolutions(m: u64) -> Vec<f64> {
    let mut rs = vec![2.0, 3.0, 7.0, (m as f64).sqrt().ceil()];
    rs.retain(|&r| r >= 2.0);
    rs
}

fn boundary_values() -> Result<(u64, Option<String>)> {
    let zero = Polarization::exact(rat(0, 1))?;
    let one = Polarization::exact(rat(1, 1))?;
    let mut cases = 0;
    for m in 1..=20u64 {
        for r in resolutions(m) {
            let Ok(spec) = EnsembleSpec::new(m, r) else { continue };
            cases += 1;
            let at0 = pfail_general(&zero, &spec)?.exact;
            let at1 = pfail_general(&one, &spec)?.exact;
            if at0 != Some(rat(1, 2)) || at1 != Some(rat(0, 1)) {
                return Ok((cases, Some(format!("M={m}, R={r}"))));
            }
        }
    }
    Ok((cases, None))
}

fn enumeration_agreement() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    for m in 1..=16u64 {
        for r in resolutions(m) {
            let Ok(spec) = EnsembleSpec::new(m, r) else { continue };
            for k in 0..=10 {
                let eps = Polarization::exact(rat(k, 10))?;
                let analytic = pfail_general(&eps, &spec)?.exact.expect("exact input");
                for class in [InputClass::Class0, InputClass::Class1] {
                    cases += 1;
                    if pfail_enumerated(&eps, &spec, class)? != analytic {
                        return Ok((cases, Some(format!("M={m}, R={r}, ε={k}/10, {class:?}"))));
                    }
                }
            }
        }
    }
    Ok((cases, None))
}

fn best_even_equals_odd() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    for m in (1..=31u64).step_by(2) {
        for k in 1..10 {
            let eps = Polarization::exact(rat(k, 10))?;
            cases += 1;
            if pfail_best(&eps, m + 1)?.exact != pfail_best(&eps, m)?.exact {
                return Ok((cases, Some(format!("M={m}, ε={k}/10"))));
            }
        }
    }
    Ok((cases, None))
}

fn best_step_closed_form_check() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    for m in (1..=31u64).step_by(2) {
        for k in 1..10 {
            let eps = Polarization::exact(rat(k, 10))?;
            let p = eps.bernoulli_p_exact().expect("exact input");
            cases += 1;
            let step = pfail_best(&eps, m + 2)?.exact.unwrap() - pfail_best(&eps, m)?.exact.unwrap();
            if step != best_step_closed_form(&p, m)? {
                return Ok((cases, Some(format!("M={m}, ε={k}/10"))));
            }
        }
    }
    Ok((cases, None))
}

fn resolution_monotonicity() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    for m in 1..=30u64 {
        for k in 1..10 {
            let eps = Polarization::exact(rat(k, 10))?;
            let mut prev: Option<BigRational> = None;
            for m_min in m / 2 + 1..=m + 1 {
                let v = pfail_threshold(&eps, m, m_min)?.exact.unwrap();
                if let Some(prev) = &prev {
                    cases += 1;
                    if &v <= prev {
                        return Ok((cases, Some(format!("M={m}, m_min={m_min}, ε={k}/10"))));
                    }
                }
                prev = Some(v);
            }
        }
    }
    Ok((cases, None))
}

fn bahadur_sandwich() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    for n in [5u64, 10, 20, 50] {
        for k in 1..10 {
            let p = rat(k, 20);
            for m in 0..=n {
                let q = BinomialTailQuery::new(n, m, p.clone())?;
                let b = bahadur_bounds(&q);
                if !b.applicable {
                    continue;
                }
                cases += 1;
                let tail = binom_tail_exact(n, m, &p)?;
                let lower = b.lower.and_then(|v| v.exact).expect("exact bound");
                let upper = b.upper.and_then(|v| v.exact).expect("exact bound");
                if !(lower <= tail && tail <= upper) {
                    return Ok((cases, Some(format!("n={n}, m={m}, p={p}"))));
                }
            }
        }
    }
    Ok((cases, None))
}

fn closed_form_agreement() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    for m in 1..=2000u64 {
        cases += 1;
        let a = eps_exponential(2.0, 1, m)?;
        let b = eps_asymptotic_general(&cf_dj_approx(m)?, m)?;
        if (a - b).abs() > 1e-14 {
            return Ok((cases, Some(format!("M={m}: {a} vs {b}"))));
        }
    }
    Ok((cases, None))
}

/// For `c = 2, q = 1`: `pfail_best(ε, M+2)·2^(M+2) ≥ pfail_best(ε, M)·2^M` at
/// odd `M ≤ 41` and every sampled `ε ≤ ε₀`.
fn ratio_growth_below_threshold() -> Result<(u64, Option<String>)> {
    let eps0 = threshold_bound(2.0, 1)?.eps0;
    let mut cases = 0;
    for m in (3..=41u64).step_by(2) {
        for k in (1..=17).filter(|&k| k as f64 / 20.0 <= eps0) {
            let eps = Polarization::exact(rat(k, 20))?;
            cases += 1;
            let here = pfail_best(&eps, m)?.exact.unwrap();
            let next = pfail_best(&eps, m + 2)?.exact.unwrap() * BigRational::from_integer(4.into());
            if next < here {
                return Ok((cases, Some(format!("M={m}, ε={k}/20"))));
            }
        }
    }
    Ok((cases, None))
}

fn circuit_determinism() -> Result<(u64, Option<String>)> {
    let mut cases = 0;
    let mut rng = trial_rng(0x5eed, 0);
    for n in 1..=8u32 {
        let mut oracles = vec![OracleSpec::constant(n, false)?, OracleSpec::constant(n, true)?];
        for _ in 0..20 {
            oracles.push(OracleSpec::random_balanced(n, &mut rng)?);
        }
        for f in oracles {
            cases += 1;
            let trace = trace_circuit(&f)?;
            let (p0, p1) = trace.output.target_probabilities();
            let want_one = f.kind().class() == InputClass::Class1;
            let (hit, miss) = if want_one { (p1, p0) } else { (p0, p1) };
            if (hit - 1.0).abs() > 1e-12 || miss > 1e-12 || trace.max_norm_drift > 1e-12 {
                return Ok((cases, Some(format!("n={n}, {:?}: p0={p0}, p1={p1}", f.kind()))));
            }
        }
    }
    Ok((cases, None))
}
