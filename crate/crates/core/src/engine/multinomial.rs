//! Exact law of the increments received by a set of tracked nodes in one
//! multigraph step: multinomial over `f` draws with cell probabilities
//! `d_i / 2F` and a remainder cell `q = 1 − Σ d_i / 2F`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{EngineError, Result};
use crate::stats::CompensatedSum;

/// Largest `f` handled with exact rational arithmetic.
pub const EXACT_LIMIT: u64 = 64;

const LN_FACT_TABLE: usize = 1000;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut acc = CompensatedSum::new();
        let mut t = Vec::with_capacity(LN_FACT_TABLE + 1);
        t.push(0.0);
        for k in 1..=LN_FACT_TABLE {
            acc.add((k as f64).ln());
            t.push(acc.value());
        }
        t
    })
}

/// `ln(n!)`: tabulated up to 1000, Stirling series (log-gamma) beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n as usize <= LN_FACT_TABLE {
        return ln_fact_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

fn validate(degrees: &[u64], two_f: u64, m: &[u64]) -> Result<u64> {
    if degrees.len() != m.len() {
        return Err(EngineError::Config(format!(
            "{} degrees but {} target increments",
            degrees.len(),
            m.len()
        )));
    }
    let sum_d: u64 = degrees.iter().sum();
    if sum_d > two_f {
        return Err(EngineError::InvariantViolation(format!(
            "tracked degrees sum to {sum_d} > 2F = {two_f}"
        )));
    }
    Ok(sum_d)
}

/// Exact `P(U = m)` as a rational; only sensible for small `f`.
pub fn step_distribution_rational(degrees: &[u64], f: u64, big_f: u64, m: &[u64]) -> Result<BigRational> {
    let two_f = 2 * big_f;
    let sum_d = validate(degrees, two_f, m)?;
    let total_m: u64 = m.iter().sum();
    if total_m > f {
        return Ok(BigRational::zero());
    }
    if f == 0 {
        return Ok(BigRational::one());
    }
    if two_f == 0 {
        return Err(EngineError::InvariantViolation("F = 0 with f > 0".into()));
    }
    let fact = |n: u64| (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    let mut numer = fact(f);
    let mut denom = fact(f - total_m);
    for (&d, &k) in degrees.iter().zip(m) {
        denom *= fact(k);
        numer *= BigInt::from(d).pow(k as u32);
    }
    numer *= BigInt::from(two_f - sum_d).pow((f - total_m) as u32);
    denom *= BigInt::from(two_f).pow(f as u32);
    Ok(BigRational::new(numer, denom))
}

/// `P(U = m)` for tracked degrees `d`, `f` new edges and `F` existing edges.
/// Uses exact rationals for `f ≤ 64` and log-space arithmetic above.
pub fn step_distribution_exact(degrees: &[u64], f: u64, big_f: u64, m: &[u64]) -> Result<f64> {
    if f <= EXACT_LIMIT {
        let p = step_distribution_rational(degrees, f, big_f, m)?;
        return Ok(p.to_f64().unwrap_or(0.0));
    }
    let two_f = 2 * big_f;
    let sum_d = validate(degrees, two_f, m)?;
    let total_m: u64 = m.iter().sum();
    if total_m > f {
        return Ok(0.0);
    }
    if two_f == 0 {
        return Err(EngineError::InvariantViolation("F = 0 with f > 0".into()));
    }
    let mut ln_p = CompensatedSum::new();
    ln_p.add(ln_factorial(f));
    ln_p.add(-ln_factorial(f - total_m));
    for (&d, &k) in degrees.iter().zip(m) {
        if k == 0 {
            continue;
        }
        if d == 0 {
            return Ok(0.0);
        }
        ln_p.add(-ln_factorial(k));
        ln_p.add(k as f64 * (d as f64 / two_f as f64).ln());
    }
    let rest = f - total_m;
    if rest > 0 {
        if sum_d == two_f {
            return Ok(0.0);
        }
        ln_p.add(rest as f64 * (-(sum_d as f64) / two_f as f64).ln_1p());
    }
    Ok(ln_p.value().exp())
}
