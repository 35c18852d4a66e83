//! Acceptance criteria, one line of output per criterion.
//!
//! Runs without the libtest harness so every line is printed even when all
//! criteria pass. Arguments that do not start with `-` select criteria by
//! number (`cargo test --test acceptance -- 5 7`).

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use qcrit::bahadur::bahadur_bounds;
use qcrit::classical::{cf_dj_approx, cf_dj_exact_rational, ClassicalModel};
use qcrit::critical::{
    eps_asymptotic_general, eps_dj_bestres, eps_dj_moderate, eps_exponential, eps_limit, solve_critical,
    ResolutionScaling,
};
use qcrit::failure::{best_step_closed_form, pfail_best, pfail_general, pfail_threshold, EnsembleSpec, Polarization};
use qcrit::prob::{binom_tail_exact, incomplete_beta, rat, BinomialTailQuery, ProbArg};
use qcrit::sim::{estimate_failure_rate, trace_circuit, trial_rng, FunctionKind, OracleSpec};
use qcrit::verify::incomplete_beta_by_integral;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn exact_eps(num: i64, den: i64) -> Polarization {
    Polarization::exact(rat(num, den)).unwrap()
}

fn within_time(outcome: Outcome, started: Instant, limit: Duration) -> Outcome {
    let took = started.elapsed();
    if took > limit {
        Outcome::new(false, format!("{}; took {took:.1?}, limit {limit:?}", outcome.detail))
    } else {
        outcome
    }
}

fn boundary_exactness() -> Outcome {
    let started = Instant::now();
    let (zero, one, half) = (exact_eps(0, 1), exact_eps(1, 1), rat(1, 2));
    let mut cases = 0;
    let mut skipped = 0;
    let mut bad = Vec::new();
    for m in 1..=40u64 {
        let mut rs = vec![2.0, 3.0, 7.0, (m as f64).sqrt().ceil()];
        rs.dedup();
        for r in rs {
            let Ok(spec) = EnsembleSpec::new(m, r) else {
                skipped += 1;
                continue;
            };
            cases += 1;
            let at0 = pfail_general(&zero, &spec).unwrap().exact.unwrap();
            let at1 = pfail_general(&one, &spec).unwrap().exact.unwrap();
            if at0 != half || at1 != rat(0, 1) {
                bad.push(format!("M={m} R={r}"));
            }
        }
    }
    within_time(
        Outcome::new(
            bad.is_empty(),
            format!("{cases} (M, R) pairs exact, {skipped} with ⌈R/2⌉ > M rejected, violations {bad:?}"),
        ),
        started,
        Duration::from_secs(10),
    )
}

fn odd_even_and_step() -> Outcome {
    let results: Vec<(u64, i64, bool, bool)> = (1..=99u64)
        .into_par_iter()
        .filter(|m| m % 2 == 1)
        .flat_map_iter(|m| {
            (1..=9i64).map(move |k| {
                let eps = exact_eps(k, 10);
                let here = pfail_best(&eps, m).unwrap().exact.unwrap();
                let even = pfail_best(&eps, m + 1).unwrap().exact.unwrap();
                let next = pfail_best(&eps, m + 2).unwrap().exact.unwrap();
                let p = eps.bernoulli_p_exact().unwrap();
                (m, k, even == here, &next - &here == best_step_closed_form(&p, m).unwrap())
            })
        })
        .collect();
    let bad: Vec<_> = results.iter().filter(|r| !(r.2 && r.3)).map(|r| (r.0, r.1)).collect();
    Outcome::new(
        bad.is_empty(),
        format!("{} (M, ε) points, equality and step closed form exact; violations {bad:?}", results.len()),
    )
}

fn resolution_monotonicity() -> Outcome {
    let counts: Vec<(u64, Vec<String>)> = (1..=60u64)
        .into_par_iter()
        .map(|m| {
            let mut cases = 0;
            let mut bad = Vec::new();
            for k in 1..=9 {
                let eps = exact_eps(k, 10);
                let values: Vec<BigRational> = (m / 2 + 1..=m + 1)
                    .map(|mm| pfail_threshold(&eps, m, mm).unwrap().exact.unwrap())
                    .collect();
                for (i, w) in values.windows(2).enumerate() {
                    cases += 1;
                    if w[1] <= w[0] {
                        bad.push(format!("M={m} m_min={} ε={k}/10", m / 2 + 2 + i as u64));
                    }
                }
            }
            (cases, bad)
        })
        .collect();
    let cases: u64 = counts.iter().map(|c| c.0).sum();
    let bad: Vec<String> = counts.into_iter().flat_map(|c| c.1).collect();
    Outcome::new(bad.is_empty(), format!("{cases} adjacent m_min pairs strictly increasing; violations {bad:?}"))
}

fn bahadur_sandwich() -> Outcome {
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in [5u64, 10, 20, 50, 100, 200] {
        for k in 1..=9 {
            let p = rat(k, 20);
            for m in 0..=n {
                let b = bahadur_bounds(&BinomialTailQuery::new(n, m, p.clone()).unwrap());
                if !b.applicable {
                    continue;
                }
                cases += 1;
                let tail = binom_tail_exact(n, m, &p).unwrap();
                let lower = b.lower.unwrap().exact.unwrap();
                let upper = b.upper.unwrap().exact.unwrap();
                if !(lower <= tail && tail <= upper) {
                    bad.push(format!("n={n} m={m} p={p}"));
                }
            }
        }
    }
    Outcome::new(bad.is_empty(), format!("{cases} applicable (n, m, p), exact comparison; violations {bad:?}"))
}

fn asymptote() -> Outcome {
    let started = Instant::now();
    let p = solve_critical(&ClassicalModel::DeutschJozsaApprox, 1, 1_000_000, &ResolutionScaling::best()).unwrap();
    let limit = eps_limit(2.0, 1).unwrap();
    let root3_2 = 3f64.sqrt() / 2.0;
    let pass = (p.eps - 0.866025).abs() <= 5e-4 && (limit - root3_2).abs() <= f64::EPSILON;
    within_time(
        Outcome::new(pass, format!("ε(10⁶) = {}, limit = {limit}, √3/2 = {root3_2}", p.eps)),
        started,
        Duration::from_secs(60),
    )
}

fn closed_forms() -> Outcome {
    let mut worst = 0.0f64;
    for m in 1..=10_000u64 {
        let a = eps_exponential(2.0, 1, m).unwrap();
        let b = eps_asymptotic_general(&cf_dj_approx(m).unwrap(), m).unwrap();
        worst = worst.max((a - b).abs());
    }
    let moderate = eps_dj_moderate(100_000).unwrap();
    let pass = worst <= 1e-14 && (moderate - 0.866025).abs() < 1e-3;
    Outcome::new(
        pass,
        format!("max |Δε| over M ≤ 10⁴ = {worst:e}, eps_dj_moderate(10⁵) = {moderate}"),
    )
}

/// Numeric `ε(100) - eps_dj_bestres(100)` from a 40-digit bisection run once
/// outside this code base.
const ORACLE_GAP_AT_100: f64 = 0.002_368_839_105_164_767;
const ORACLE_EPS_AT_100: f64 = 0.856_827_217_093_462_8;

fn curve_regression() -> Outcome {
    let dj = ClassicalModel::DeutschJozsaApprox;
    let best = ResolutionScaling::best();
    let asym = eps_limit(2.0, 1).unwrap();
    let mut notes = Vec::new();

    let between_ms = [100u64, 200, 500, 1000, 2000, 5000, 10_000, 100_000, 1_000_000];
    let mut outside = Vec::new();
    for &m in &between_ms {
        let num = solve_critical(&dj, 1, m, &best).unwrap().eps;
        let bestres = eps_dj_bestres(m).unwrap();
        if !(bestres.min(asym) <= num && num <= bestres.max(asym)) {
            outside.push(format!("M={m}: numeric {num:.7}, bestres {bestres:.7}"));
        }
    }
    let between = outside.is_empty();
    notes.push(format!(
        "between bestres and asymptote: {} ({} of {} outside{})",
        if between { "yes" } else { "no" },
        outside.len(),
        between_ms.len(),
        outside.first().map(|s| format!(", e.g. {s}")).unwrap_or_default()
    ));

    let eps100 = solve_critical(&dj, 1, 100, &best).unwrap().eps;
    let gap_1e4 = (solve_critical(&dj, 1, 10_000, &best).unwrap().eps - eps_dj_bestres(10_000).unwrap()).abs();
    let gap_ok = gap_1e4 < ORACLE_GAP_AT_100 && (eps100 - ORACLE_EPS_AT_100).abs() < 1e-11;
    notes.push(format!("gap at 10⁴ = {gap_1e4:.3e} vs oracle gap at 10² = {ORACLE_GAP_AT_100:.3e}"));

    let sampled = [1u64, 2, 3, 4, 5, 7, 10, 16, 20, 30, 50, 64, 100, 200, 500, 1000, 2000, 5000, 10_000];
    let below: Vec<u64> = sampled
        .iter()
        .copied()
        .filter(|&m| {
            let coarse = solve_critical(&dj, 1, m, &ResolutionScaling::sqrt_m()).unwrap().eps;
            coarse < solve_critical(&dj, 1, m, &best).unwrap().eps
        })
        .collect();
    notes.push(format!("R=√M ≥ R=2 at {}/{} sampled M", sampled.len() - below.len(), sampled.len()));

    Outcome::new(between && gap_ok && below.is_empty(), notes.join("; "))
}

fn monte_carlo() -> Outcome {
    let started = Instant::now();
    let mut cells = Vec::new();
    for eps in [0.2, 0.5, 0.8] {
        for m in [3u64, 11, 50, 101] {
            for sqrt in [false, true] {
                let r = if sqrt { ResolutionScaling::sqrt_m().resolution(m) } else { 2.0 };
                cells.push((eps, m, r));
            }
        }
    }
    let seeds = 20u64;
    let trials = 100_000u64;
    let mut within = 0usize;
    let mut within_null = 0usize;
    let mut outside_at_zero = 0usize;
    let mut worst_cells = std::collections::BTreeMap::new();
    for &(eps, m, r) in &cells {
        let pol = Polarization::new(eps).unwrap();
        let spec = EnsembleSpec::new(m, r).unwrap();
        let analytic = pfail_general(&pol, &spec).unwrap().value();
        let null_sigma = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        for seed in 0..seeds {
            let est = estimate_failure_rate(&pol, &spec, trials, 1000 + seed).unwrap();
            let diff = (est.rate - analytic).abs();
            if diff <= 4.0 * est.stderr {
                within += 1;
            } else {
                if est.failures == 0 {
                    outside_at_zero += 1;
                }
                *worst_cells.entry(format!("ε={eps} M={m} R={r:.3}")).or_insert(0u32) += 1;
            }
            if diff <= 4.0 * null_sigma {
                within_null += 1;
            }
        }
    }
    let total = cells.len() * seeds as usize;
    let frac = within as f64 / total as f64;
    let failing: Vec<String> = worst_cells.iter().map(|(k, v)| format!("{k} ({v}/{seeds})")).collect();
    within_time(
        Outcome::new(
            frac >= 0.95,
            format!(
                "{within}/{total} cell-seeds within 4·stderr ({:.1}%); outside: {failing:?}, \
                 {outside_at_zero} of them with zero observed failures (stderr = 0); \
                 with the analytic σ in place of the empirical stderr: {within_null}/{total}",
                100.0 * frac
            ),
        ),
        started,
        Duration::from_secs(300),
    )
}

/// `(failures, runs)` over every balanced support and every `M`-subset of
/// arguments, with the classical rule "all outputs equal ⇒ constant".
fn classical_enumeration(n: u32, m: u32) -> (u64, u64) {
    let big_n = 1u32 << n;
    let full: u32 = if big_n == 32 { u32::MAX } else { (1 << big_n) - 1 };
    let masks = |k: u32| -> Vec<u32> { (0..=full).filter(|s| s.count_ones() == k).collect() };
    let supports = masks(big_n / 2);
    let subsets = masks(m);
    let failures: u64 = supports
        .par_iter()
        .map(|&s| subsets.iter().filter(|&&a| a & s == a || a & s == 0).count() as u64)
        .sum();
    (failures, (supports.len() * subsets.len()) as u64)
}

fn classical_dj() -> Outcome {
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 1..=4u32 {
        let big_n = 1u32 << n;
        for m in 1..=big_n / 2 + 1 {
            let (fail, runs) = classical_enumeration(n, m);
            for p_bal in [rat(1, 2), rat(1, 1), rat(1, 3)] {
                cases += 1;
                let brute = &p_bal * BigRational::new(BigInt::from(fail), BigInt::from(runs));
                if cf_dj_exact_rational(n, m as u64, &p_bal).unwrap() != brute {
                    bad.push(format!("N={big_n} M={m} p_bal={p_bal}"));
                }
            }
        }
    }
    let large = qcrit::prob::rational_to_f64(&cf_dj_exact_rational(20, 10, &rat(1, 2)).unwrap());
    let rel = (large - 2f64.powi(-10)).abs() / 2f64.powi(-10);
    Outcome::new(
        bad.is_empty() && rel < 1e-4,
        format!("{cases} (N, M, p_bal) exact matches, violations {bad:?}; n=20 M=10 relative gap to 2⁻¹⁰ = {rel:.2e}"),
    )
}

fn circuit_determinism() -> Outcome {
    let mut rng = trial_rng(0xD1, 0);
    let mut cases = 0;
    let mut worst_target = 0.0f64;
    let mut worst_zero = 0.0f64;
    for n in 1..=10u32 {
        let mut oracles = vec![OracleSpec::constant(n, false).unwrap(), OracleSpec::constant(n, true).unwrap()];
        for _ in 0..200 {
            oracles.push(OracleSpec::random_balanced(n, &mut rng).unwrap());
        }
        for f in oracles {
            cases += 1;
            let trace = trace_circuit(&f).unwrap();
            let (p0, p1) = trace.output.target_probabilities();
            let expect_one = f.kind() == FunctionKind::Balanced;
            let err = if expect_one { (1.0 - p1).abs().max(p0) } else { (1.0 - p0).abs().max(p1) };
            worst_target = worst_target.max(err).max(trace.max_norm_drift);
            if expect_one {
                let before = &trace.before_final;
                let zero = (before.amplitude(0, false).norm_sqr() + before.amplitude(0, true).norm_sqr()).sqrt();
                worst_zero = worst_zero.max(zero);
            }
        }
    }
    Outcome::new(
        worst_target < 1e-12 && worst_zero < 1e-12,
        format!("{cases} oracles; worst target deviation {worst_target:.1e}, worst all-zero amplitude {worst_zero:.1e}"),
    )
}

fn beta_identities() -> Outcome {
    let rows: Vec<(u64, Vec<String>)> = (0..=60u64)
        .into_par_iter()
        .map(|n| {
            let mut cases = 0;
            let mut bad = Vec::new();
            for k in 0..=16 {
                let p = rat(k, 16);
                for m in 1..=n {
                    cases += 1;
                    let tail = binom_tail_exact(n, m, &p).unwrap();
                    let beta = incomplete_beta(&ProbArg::Exact(p.clone()), m, n - m + 1).unwrap().exact.unwrap();
                    if tail != incomplete_beta_by_integral(&p, m, n - m + 1) || tail != beta {
                        bad.push(format!("n={n} m={m} p={p}"));
                    }
                }
            }
            (cases, bad)
        })
        .collect();
    let cases: u64 = rows.iter().map(|r| r.0).sum();
    let bad: Vec<String> = rows.into_iter().flat_map(|r| r.1).collect();
    let mut worst = 0.0f64;
    for x in 1..=50u64 {
        for k in 0..=40 {
            let p = ProbArg::Float(k as f64 / 40.0);
            let lhs = incomplete_beta(&p, x + 1, x).unwrap().value() + incomplete_beta(&p, x, x + 1).unwrap().value();
            let rhs = 2.0 * incomplete_beta(&p, x, x).unwrap().value();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Outcome::new(
        bad.is_empty() && worst <= 1e-12,
        format!("{cases} tail/integral pairs exact, violations {bad:?}; symmetry max error {worst:.1e}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "boundary exactness", boundary_exactness),
    (2, "odd-M equality and M+2 step", odd_even_and_step),
    (3, "resolution monotonicity", resolution_monotonicity),
    (4, "Bahadur sandwich", bahadur_sandwich),
    (5, "asymptote reproduction", asymptote),
    (6, "closed-form agreement", closed_forms),
    (7, "critical-polarization curve regression", curve_regression),
    (8, "Monte Carlo consistency", monte_carlo),
    (9, "classical Deutsch-Jozsa exactness", classical_dj),
    (10, "circuit determinism", circuit_determinism),
    (11, "incomplete-beta identities", beta_identities),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    let mut ran = 0;
    for &(id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let outcome = run();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict} {name} [{:.1?}]: {}",
            started.elapsed(),
            outcome.detail
        );
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
