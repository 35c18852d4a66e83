use num_traits::ToPrimitive;

use qcrit::bahadur::bahadur_bounds;
use qcrit::classical::{cf_dj_approx, cf_dj_exact, ClassicalModel};
use qcrit::critical::{
    curve, refit_moderate_constant, simple_threshold_bound, solve_critical, solve_critical_verified, threshold_bound,
    CriticalPolarizationPoint, Method, ResolutionScaling,
};
use qcrit::failure::{pfail_general, EnsembleSpec, Polarization};
use qcrit::prob::{binom_tail_exact, ln_binom_tail, rational_to_f64, BinomialTailQuery};
use qcrit::sim::{estimate_classical_failure, estimate_failure_rate, MAX_CIRCUIT_BITS};
use qcrit::verify::{check_names, run_checks};

use crate::args::{
    BahadurArgs, ClassicalArgs, Command, CriticalArgs, CurveArgs, FailprobArgs, ModelArgs, ModelKind, ResolutionArgs,
    SimulateArgs, VerifyArgs,
};
use crate::table::{Cell, Table};
use crate::CliError;

pub const CURVE_HEADER: &[&str] = &["M", "method", "resolution", "eps", "residual"];
pub const BAHADUR_HEADER: &[&str] = &["n", "m", "p", "lower", "exact", "upper", "correction", "applicable"];
pub const FAILPROB_HEADER: &[&str] = &["eps", "M", "R", "m_min", "pfail_exact", "pfail_float"];
pub const SIMULATE_HEADER: &[&str] = &["eps", "M", "R", "trials", "seed", "rate", "stderr", "analytic", "z_score"];
pub const CLASSICAL_HEADER: &[&str] = &["n", "M", "p_bal", "exact", "approx", "rate", "stderr"];
pub const VERIFY_HEADER: &[&str] = &["check", "cases", "passed", "detail"];

/// Largest `M` whose analytic column in `simulate` is computed exactly.
const SIMULATE_EXACT_LIMIT: u64 = 2000;

/// Largest `n` for exact tails in `bahadur`.
const BAHADUR_EXACT_LIMIT: u64 = 5000;

type Outcome = (Table, Result<(), CliError>);

pub fn run_command(command: &Command) -> Result<Outcome, CliError> {
    let table = match command {
        Command::Failprob(a) => failprob(a)?,
        Command::Critical(a) => critical(a)?,
        Command::Curve(a) => curve_cmd(a)?,
        Command::Bahadur(a) => bahadur(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Classical(a) => classical(a)?,
        Command::Verify(a) => return verify(a),
    };
    Ok((table, Ok(())))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn scaling(r: &ResolutionArgs) -> Result<ResolutionScaling, CliError> {
    match (r.r0, r.alpha) {
        (Some(r0), Some(alpha)) => ResolutionScaling::new(r0, alpha).map_err(|e| usage(format!("--r0/--alpha: {e}"))),
        _ => Ok(r.r.scaling()),
    }
}

fn model(a: &ModelArgs) -> Result<ClassicalModel, CliError> {
    match a.model {
        ModelKind::Dj => Ok(ClassicalModel::DeutschJozsaApprox),
        ModelKind::DjExact => {
            let n = a.n.ok_or_else(|| usage("--model dj-exact requires --n"))?;
            ClassicalModel::dj_exact(n, a.p_bal.clone()).map_err(|e| usage(format!("--n/--p-bal: {e}")))
        }
        ModelKind::Exponential => {
            let c = a.c.ok_or_else(|| usage("--model exponential requires --c"))?;
            ClassicalModel::exponential(c).map_err(|e| usage(format!("--c: {e}")))
        }
    }
}

fn failprob(a: &FailprobArgs) -> Result<Table, CliError> {
    let scaling = scaling(&a.resolution)?;
    let mut t = Table::new(FAILPROB_HEADER);
    for eps in &a.eps {
        for &m in &a.m.0 {
            let r = scaling.resolution(m);
            let spec = EnsembleSpec::new(m, r)?;
            let pol = if m <= a.exact_limit {
                Polarization::exact(eps.clone())?
            } else {
                Polarization::new(rational_to_f64(eps))?
            };
            let v = pfail_general(&pol, &spec)?;
            let float = v.value();
            t.push(vec![
                rational_to_f64(eps).into(),
                m.into(),
                r.into(),
                spec.m_min().into(),
                v.exact.map(Cell::Rational).unwrap_or(Cell::Empty),
                float.into(),
            ]);
        }
    }
    Ok(t)
}

fn point_row(t: &mut Table, m: u64, method: Method, point: &qcrit::Result<CriticalPolarizationPoint>) {
    match point {
        Ok(p) => {
            let mut extra = Vec::new();
            if let Some((lo, hi)) = p.bracket {
                extra.push(("bracket_lo", lo.into()));
                extra.push(("bracket_hi", hi.into()));
            }
            if let Some(check) = &p.exact_check {
                extra.push(("exact_residual", check.residual.into()));
                extra.push(("sign_change", check.sign_change.into()));
            }
            t.push_with_extra(
                vec![m.into(), method.as_str().into(), p.resolution.into(), p.eps.into(), p.residual.into()],
                extra,
            );
        }
        Err(e) => {
            t.notes.push(format!("warning: M={m} {method}: {e}"));
            t.push_with_extra(
                vec![m.into(), method.as_str().into(), Cell::Empty, Cell::Empty, Cell::Empty],
                vec![("error", e.to_string().into())],
            );
        }
    }
}

fn critical(a: &CriticalArgs) -> Result<Table, CliError> {
    let model = model(&a.model)?;
    let q = a.model.q;
    if a.threshold {
        let c = model.base();
        let tb = threshold_bound(c, q)?;
        let (simple_m, simple_eps) = simple_threshold_bound(c)?;
        let mut t = Table::new(&["c", "q", "M0", "eps0", "eps_prime", "solved_at", "eps_cap", "simple_M", "simple_eps"]);
        t.push(vec![
            c.into(),
            q.into(),
            tb.m0.into(),
            tb.eps0.into(),
            tb.eps_prime.into(),
            tb.solved_at.into(),
            tb.eps_cap.into(),
            simple_m.into(),
            simple_eps.into(),
        ]);
        return Ok(t);
    }
    if a.refit {
        let ms = a.m.as_ref().map_or_else(|| crate::parse::log_grid(10, 1000, 5), |m| m.0.clone());
        let report = refit_moderate_constant(&ms)?;
        let mut t = Table::new(&["M", "eps_numeric", "k_over_pi"]);
        for r in &report.rows {
            t.push(vec![r.m.into(), r.eps_numeric.into(), r.k_over_pi.into()]);
        }
        t.notes.push(format!(
            "least-squares K/pi over these M: {} (formula constant: 2.44)",
            crate::table::format_float(report.fitted_k_over_pi)
        ));
        return Ok(t);
    }
    let ms = a.m.as_ref().ok_or_else(|| usage("--m is required unless --threshold is given"))?;
    let scaling = scaling(&a.resolution)?;
    let mut t = Table::new(CURVE_HEADER);
    for &m in &ms.0 {
        let point = if a.no_exact_check {
            solve_critical(&model, q, m, &scaling)
        } else {
            solve_critical_verified(&model, q, m, &scaling)
        };
        point_row(&mut t, m, Method::Numeric, &point);
    }
    Ok(t)
}

fn curve_cmd(a: &CurveArgs) -> Result<Table, CliError> {
    let model = model(&a.model)?;
    let scaling = scaling(&a.resolution)?;
    let rows = curve(&model, a.model.q, &a.m.0, &scaling, &a.method)?;
    let mut t = Table::new(CURVE_HEADER);
    for row in &rows {
        point_row(&mut t, row.m, row.method, &row.point);
    }
    Ok(t)
}

fn bahadur(a: &BahadurArgs) -> Result<Table, CliError> {
    let ms: Vec<u64> = if a.m.is_empty() { (0..=a.n).collect() } else { a.m.clone() };
    let p_f = rational_to_f64(&a.p);
    let mut t = Table::new(BAHADUR_HEADER);
    for &m in &ms {
        if m > a.n {
            return Err(usage(format!("--m {m} exceeds --n {}", a.n)));
        }
        let b = bahadur_bounds(&BinomialTailQuery::new(a.n, m, a.p.clone())?);
        let exact: Cell = if a.n <= BAHADUR_EXACT_LIMIT {
            Cell::Rational(binom_tail_exact(a.n, m, &a.p)?)
        } else {
            ln_binom_tail(a.n, m, p_f)?.exp().into()
        };
        t.push(vec![
            a.n.into(),
            m.into(),
            p_f.into(),
            b.lower.map(|v| v.value()).into(),
            exact,
            b.upper.map(|v| v.value()).into(),
            b.correction.into(),
            b.applicable.into(),
        ]);
    }
    Ok(t)
}

fn simulate(a: &SimulateArgs) -> Result<Table, CliError> {
    let scaling = scaling(&a.resolution)?;
    let mut t = Table::new(SIMULATE_HEADER);
    for eps in &a.eps {
        let pol = Polarization::new(rational_to_f64(eps))?;
        for &m in &a.m.0 {
            let r = scaling.resolution(m);
            let spec = EnsembleSpec::new(m, r)?;
            let est = estimate_failure_rate(&pol, &spec, a.trials, a.seed)?;
            let analytic = if m <= SIMULATE_EXACT_LIMIT {
                pfail_general(&Polarization::exact(eps.clone())?, &spec)?.value()
            } else {
                pfail_general(&pol, &spec)?.value()
            };
            let diff = est.rate - analytic;
            let z = if diff == 0.0 { 0.0 } else { diff / est.stderr };
            t.push(vec![
                pol.value().into(),
                m.into(),
                r.into(),
                a.trials.into(),
                a.seed.into(),
                est.rate.into(),
                est.stderr.into(),
                analytic.into(),
                z.into(),
            ]);
        }
    }
    Ok(t)
}

fn classical(a: &ClassicalArgs) -> Result<Table, CliError> {
    if a.trials > 0 && a.n > MAX_CIRCUIT_BITS {
        return Err(usage(format!("--trials needs --n ≤ {MAX_CIRCUIT_BITS}")));
    }
    let p_bal = a.p_bal.to_f64().unwrap_or(f64::NAN);
    let mut t = Table::new(CLASSICAL_HEADER);
    for &m in &a.m.0 {
        let exact = cf_dj_exact(a.n, m, &a.p_bal)?;
        let exact_cell = match exact.exact {
            Some(r) => Cell::Rational(r),
            None => exact.value().into(),
        };
        let (rate, stderr) = if a.trials > 0 {
            if m > 1u64 << a.n {
                return Err(usage(format!("--m {m} exceeds N = {}", 1u64 << a.n)));
            }
            let est = estimate_classical_failure(a.n, m, p_bal, a.trials, a.seed)?;
            (Some(est.rate), Some(est.stderr))
        } else {
            (None, None)
        };
        t.push(vec![
            u64::from(a.n).into(),
            m.into(),
            Cell::Rational(a.p_bal.clone()),
            exact_cell,
            cf_dj_approx(m)?.value().into(),
            rate.into(),
            stderr.into(),
        ]);
    }
    Ok(t)
}

fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let known = check_names();
    if let Some(bad) = a.check.iter().find(|c| !known.contains(&c.as_str())) {
        return Err(usage(format!("--check: unknown check `{bad}`; known: {}", known.join(", "))));
    }
    let reports = run_checks(&a.check);
    let mut t = Table::new(VERIFY_HEADER);
    for r in &reports {
        t.push(vec![r.name.into(), r.cases.into(), r.passed.into(), r.detail.clone().into()]);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    let status = if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed checks: {}", failed.join(", "))))
    };
    Ok((t, status))
}

