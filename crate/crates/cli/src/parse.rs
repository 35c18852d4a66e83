//! Flag value parsers. Each returns a message naming what was wrong; clap
//! attaches the offending flag.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use qcrit::critical::ResolutionScaling;

/// Largest number of ensemble sizes a single range may expand to.
pub const MAX_RANGE_POINTS: u64 = 1_000_000;

/// Points per decade in `a:b:log` when no count is given.
pub const LOG_POINTS_PER_DECADE: u32 = 20;

/// An exactly parsed number: `a/b`, or a decimal with optional exponent.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| format!("`{s}`: bad numerator"))?;
        let den: BigInt = den.trim().parse().map_err(|_| format!("`{s}`: bad denominator"))?;
        if den.is_zero() {
            return Err(format!("`{s}`: zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| format!("`{s}`: bad exponent"))?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(format!("`{s}` is not a number"));
    }
    let digits: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// A probability-like value in `[0, 1]`, kept exact.
pub fn parse_unit_interval(s: &str) -> Result<BigRational, String> {
    let r = parse_rational(s)?;
    if r < BigRational::zero() || r > BigRational::one() {
        return Err(format!("`{s}` must lie in [0, 1]"));
    }
    Ok(r)
}

fn parse_positive(s: &str) -> Result<u64, String> {
    let v: u64 = s.trim().parse().map_err(|_| format!("`{s}` is not a positive integer"))?;
    if v == 0 {
        return Err(format!("`{s}` must be positive"));
    }
    Ok(v)
}

/// Log-spaced integers from `a` to `b` inclusive, `per_decade` per factor 10.
pub fn log_grid(a: u64, b: u64, per_decade: u32) -> Vec<u64> {
    let decades = (b as f64 / a as f64).log10();
    let steps = (decades * per_decade as f64).ceil().max(1.0) as u64;
    let mut out: Vec<u64> = (0..=steps)
        .map(|i| {
            let x = a as f64 * 10f64.powf(decades * i as f64 / steps as f64);
            (x.round() as u64).clamp(a, b)
        })
        .collect();
    out.dedup();
    out
}

/// Sorted, deduplicated ensemble sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MList(pub Vec<u64>);

/// Comma-separated ensemble sizes: `7`, `a:b` (inclusive), `a:b:log` or
/// `a:b:log:K` (log-spaced, `K` points per decade).
pub fn parse_m_list(s: &str) -> Result<MList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [one] => out.push(parse_positive(one)?),
            [a, b, rest @ ..] => {
                let (a, b) = (parse_positive(a)?, parse_positive(b)?);
                if a > b {
                    return Err(format!("range `{part}` is empty"));
                }
                match rest {
                    [] => {
                        if b - a >= MAX_RANGE_POINTS {
                            return Err(format!("range `{part}` has more than {MAX_RANGE_POINTS} points; use `:log`"));
                        }
                        out.extend(a..=b);
                    }
                    ["log"] => out.extend(log_grid(a, b, LOG_POINTS_PER_DECADE)),
                    ["log", k] => {
                        let k = parse_positive(k)?;
                        if k > 10_000 {
                            return Err(format!("`{k}` points per decade is too many"));
                        }
                        out.extend(log_grid(a, b, k as u32));
                    }
                    _ => return Err(format!("`{part}`: expected a:b, a:b:log or a:b:log:K")),
                }
            }
            [] => unreachable!("split yields at least one field"),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(MList(out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolutionArg {
    Best,
    Sqrt,
    Fixed(f64),
}

pub fn parse_resolution(s: &str) -> Result<ResolutionArg, String> {
    match s.trim() {
        "best" => Ok(ResolutionArg::Best),
        "sqrt" => Ok(ResolutionArg::Sqrt),
        other => {
            let r: f64 = other
                .parse()
                .map_err(|_| format!("`{s}`: expected best, sqrt or a number ≥ 2"))?;
            if !r.is_finite() || r < 2.0 {
                return Err(format!("`{s}`: resolution must be a finite number ≥ 2"));
            }
            Ok(ResolutionArg::Fixed(r))
        }
    }
}

impl ResolutionArg {
    pub fn scaling(self) -> ResolutionScaling {
        match self {
            ResolutionArg::Best => ResolutionScaling::best(),
            ResolutionArg::Sqrt => ResolutionScaling::sqrt_m(),
            ResolutionArg::Fixed(r) => ResolutionScaling::fixed(r).expect("validated when parsed"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qcrit::prob::rat;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("2.5e-1").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("1E2").unwrap(), rat(100, 1));
        assert_eq!(parse_rational(".25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-0.1").unwrap(), rat(-1, 10));
        for bad in ["", ".", "abc", "1/0", "1e", "0.5.5", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
        assert!(parse_unit_interval("1.01").is_err());
        assert!(parse_unit_interval("1").is_ok());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_m_list("3").unwrap().0, vec![3]);
        assert_eq!(parse_m_list("1:4,10,2").unwrap().0, vec![1, 2, 3, 4, 10]);
        let g = parse_m_list("1:1000000:log").unwrap().0;
        assert_eq!((g[0], *g.last().unwrap()), (1, 1_000_000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.len() > 50 && g.len() <= 121);
        assert_eq!(parse_m_list("10:1000:log:1").unwrap().0, vec![10, 100, 1000]);
        for bad in ["0", "5:2", "1:2:lin", "a", "1:10000000", ""] {
            assert!(parse_m_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn resolutions() {
        assert_eq!(parse_resolution("best").unwrap(), ResolutionArg::Best);
        assert_eq!(parse_resolution("3.5").unwrap(), ResolutionArg::Fixed(3.5));
        assert!(parse_resolution("1").is_err());
        assert!(parse_resolution("inf").is_err());
    }
}
