//! Edge-growth functions `f(t)`, their prefix sums `F(t)`, and the
//! summability diagnostics used to classify a growth profile.
//!
//! A profile is fixed by three structural constraints: `f(0) = e'` (the seed
//! edge count), `f(t) = 0` for `1 ≤ t < v'` and `f(t) ≥ 1` from `v'` on.
//! [`GrowthTable`] caches `f` and `F` up to a horizon with exact `u64`
//! arithmetic; every probability in the process is a ratio of these
//! integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{big_to_u64, Rational};
use crate::stats::CompensatedSum;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrowthError {
    #[error("t = {t} is outside the available range (limit {limit})")]
    OutOfRange { t: u64, limit: u64 },
    #[error("invalid growth spec: {0}")]
    InvalidSpec(String),
    #[error("f({t}) = {value} violates the structural constraint: {reason}")]
    Structural { t: u64, value: u64, reason: &'static str },
    #[error("xi product gives non-integer f({t}) = {value}")]
    NonIntegerXi { t: u64, value: String },
    #[error("xi product: F({t}) closed form {closed} differs from prefix sum {summed}")]
    XiPrefixMismatch { t: u64, closed: String, summed: String },
    #[error("integer overflow evaluating growth at t = {t}")]
    Overflow { t: u64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("horizon {horizon} is shorter than twice the first checkpoint ({needed})")]
    InsufficientRange { horizon: u64, needed: u64 },
}

pub type Result<T> = std::result::Result<T, GrowthError>;

/// The `ξ` sequence: `ξ_n = head[n]` for `n < head.len()`, `tail` afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiSequence {
    #[serde(default)]
    pub head: Vec<Rational>,
    pub tail: Rational,
}

impl XiSequence {
    pub fn constant(value: Rational) -> Self {
        XiSequence {
            head: Vec::new(),
            tail: value,
        }
    }

    pub fn get(&self, n: u64) -> Rational {
        self.head.get(n as usize).copied().unwrap_or(self.tail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthKind {
    /// `f(t) = c` for `t ≥ v'`.
    Constant { c: u64 },
    /// `f(t) = max(1, ⌊c·t⌋)` for `t ≥ v'`.
    LinearFloor { c: Rational },
    /// `f(t) = max(1, ⌊c·t^α⌋)` for `t ≥ v'`.
    PowerFloor { c: Rational, alpha: Rational },
    /// `f(t) = t` when `t` is a power of two, `1` otherwise (for `t ≥ v'`).
    PowerOfTwoSpike,
    /// `f(t) = ξ_0 · Π_{n=1}^{t−1}(ξ_n + 1) · ξ_t`, with `f(0) = ξ_0`.
    XiProduct { xi: XiSequence },
    /// Explicit values `f(0), f(1), …`.
    Table { values: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSpec {
    #[serde(flatten)]
    pub kind: GrowthKind,
    pub e_prime: u64,
    pub v_prime: u64,
}

impl GrowthSpec {
    pub fn new(kind: GrowthKind, e_prime: u64, v_prime: u64) -> Result<Self> {
        let spec = GrowthSpec { kind, e_prime, v_prime };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(c: u64, e_prime: u64, v_prime: u64) -> Result<Self> {
        Self::new(GrowthKind::Constant { c }, e_prime, v_prime)
    }

    pub fn linear_floor(c: Rational, e_prime: u64, v_prime: u64) -> Result<Self> {
        Self::new(GrowthKind::LinearFloor { c }, e_prime, v_prime)
    }

    pub fn power_of_two_spike(e_prime: u64, v_prime: u64) -> Result<Self> {
        Self::new(GrowthKind::PowerOfTwoSpike, e_prime, v_prime)
    }

    /// The canonical linear profile `f = 1, 0, 2, 3, 4, …` over a single-edge seed.
    pub fn canonical_linear() -> Self {
        Self::linear_floor(Rational::from_integer(1), 1, 2).expect("canonical profile is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_prime == 0 {
            return Err(GrowthError::InvalidSpec("v_prime must be positive".into()));
        }
        match &self.kind {
            GrowthKind::Constant { c } => {
                if *c == 0 {
                    return Err(GrowthError::InvalidSpec("constant c must be ≥ 1".into()));
                }
            }
            GrowthKind::LinearFloor { c } => {
                if !c.is_positive() {
                    return Err(GrowthError::InvalidSpec("linear c must be positive".into()));
                }
            }
            GrowthKind::PowerFloor { c, alpha } => {
                if !c.is_positive() || alpha.numer() < 0 {
                    return Err(GrowthError::InvalidSpec("power floor needs c > 0 and alpha ≥ 0".into()));
                }
            }
            GrowthKind::PowerOfTwoSpike => {}
            GrowthKind::XiProduct { xi } => {
                if xi
                    .head
                    .iter()
                    .chain(std::iter::once(&xi.tail))
                    .any(|x| !x.is_positive())
                {
                    return Err(GrowthError::InvalidSpec("all xi values must be positive".into()));
                }
                if self.v_prime != 1 {
                    return Err(GrowthError::InvalidSpec(
                        "xi products are positive from t = 1 on, so v_prime must be 1".into(),
                    ));
                }
                let f0 = big_to_u64(&xi.get(0).to_big()).ok_or(GrowthError::NonIntegerXi {
                    t: 0,
                    value: xi.get(0).to_string(),
                })?;
                if f0 != self.e_prime {
                    return Err(GrowthError::InvalidSpec(format!(
                        "xi_0 = {f0} must equal e_prime = {}",
                        self.e_prime
                    )));
                }
            }
            GrowthKind::Table { values } => {
                if values.is_empty() {
                    return Err(GrowthError::InvalidSpec("table must contain f(0)".into()));
                }
                for (t, &v) in values.iter().enumerate() {
                    check_structure(self, t as u64, v)?;
                }
            }
        }
        Ok(())
    }
}

fn check_structure(spec: &GrowthSpec, t: u64, value: u64) -> Result<()> {
    if t == 0 && value != spec.e_prime {
        return Err(GrowthError::Structural {
            t,
            value,
            reason: "f(0) must equal e'",
        });
    }
    if t >= 1 && t < spec.v_prime && value != 0 {
        return Err(GrowthError::Structural {
            t,
            value,
            reason: "f(t) must be 0 for 1 ≤ t < v'",
        });
    }
    if t >= spec.v_prime && value == 0 {
        return Err(GrowthError::Structural {
            t,
            value,
            reason: "f(t) must be ≥ 1 for t ≥ v'",
        });
    }
    Ok(())
}

/// Evaluates `f(t)`.
pub fn eval_f(spec: &GrowthSpec, t: u64) -> Result<u64> {
    match &spec.kind {
        GrowthKind::Table { values } => {
            return values.get(t as usize).copied().ok_or(GrowthError::OutOfRange {
                t,
                limit: values.len() as u64 - 1,
            });
        }
        GrowthKind::XiProduct { xi } => {
            return xi_values(xi, t).map(|v| *v.last().expect("non-empty"));
        }
        _ => {}
    }
    if t == 0 {
        return Ok(spec.e_prime);
    }
    if t < spec.v_prime {
        return Ok(0);
    }
    let raw: u64 = match &spec.kind {
        GrowthKind::Constant { c } => *c,
        GrowthKind::LinearFloor { c } => u64::try_from(c.floor_mul(t)).map_err(|_| GrowthError::Overflow { t })?,
        GrowthKind::PowerFloor { c, alpha } => power_floor(*c, *alpha, t)?,
        GrowthKind::PowerOfTwoSpike => {
            if t.is_power_of_two() {
                t
            } else {
                1
            }
        }
        GrowthKind::XiProduct { .. } | GrowthKind::Table { .. } => unreachable!(),
    };
    Ok(raw.max(1))
}

fn power_floor(c: Rational, alpha: Rational, t: u64) -> Result<u64> {
    if alpha.is_integer() {
        let p = BigInt::from(t).pow(alpha.numer() as u32);
        let v = (BigRational::from_integer(p) * c.to_big()).floor().to_integer();
        v.to_u64().ok_or(GrowthError::Overflow { t })
    } else {
        let v = (c.to_f64() * (t as f64).powf(alpha.to_f64())).floor();
        if !v.is_finite() || v > u64::MAX as f64 {
            return Err(GrowthError::Overflow { t });
        }
        Ok(v as u64)
    }
}

/// `f(0..=t)` for a xi product, exactly.
fn xi_values(xi: &XiSequence, t: u64) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(t as usize + 1);
    let xi0 = xi.get(0).to_big();
    // Running F(s) = ξ_0 · Π_{n=1}^{s−1}(ξ_n + 1), starting from F(1) = ξ_0.
    let mut big_f = xi0.clone();
    for s in 0..=t {
        let value = if s == 0 {
            xi0.clone()
        } else {
            let v = &big_f * xi.get(s).to_big();
            big_f = &big_f * (xi.get(s).to_big() + BigRational::one());
            v
        };
        match big_to_u64(&value) {
            Some(v) => out.push(v),
            None if value.is_integer() => return Err(GrowthError::Overflow { t: s }),
            None => {
                return Err(GrowthError::NonIntegerXi {
                    t: s,
                    value: value.to_string(),
                })
            }
        }
    }
    Ok(out)
}

/// Builds an explicit table from a `ξ` sequence, rejecting the first `t`
/// for which `f(t)` is not a positive integer. The closed form for `F(t)`
/// is cross-checked against the prefix sums of the produced values.
pub fn xi_build(xi: &XiSequence, horizon: u64) -> Result<GrowthSpec> {
    if xi
        .head
        .iter()
        .chain(std::iter::once(&xi.tail))
        .any(|x| !x.is_positive())
    {
        return Err(GrowthError::InvalidSpec("all xi values must be positive".into()));
    }
    let values = xi_values(xi, horizon)?;

    let mut closed = xi.get(0).to_big();
    let mut summed = BigRational::zero();
    for t in 1..=horizon {
        summed += BigRational::from_integer(BigInt::from(values[t as usize - 1]));
        if t >= 2 {
            closed *= xi.get(t - 1).to_big() + BigRational::one();
        }
        if closed != summed {
            return Err(GrowthError::XiPrefixMismatch {
                t,
                closed: closed.to_string(),
                summed: summed.to_string(),
            });
        }
    }
    let e_prime = values[0];
    GrowthSpec::new(GrowthKind::Table { values }, e_prime, 1)
}

/// `f` and `F` cached up to a horizon. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTable {
    spec: GrowthSpec,
    f_values: Vec<u64>,
    prefix: Vec<u64>,
}

impl GrowthTable {
    /// Caches `f(0..=horizon)` and `F(0..=horizon)`.
    pub fn build(spec: &GrowthSpec, horizon: u64) -> Result<Self> {
        spec.validate()?;
        let f_values = match &spec.kind {
            GrowthKind::XiProduct { xi } => xi_values(xi, horizon)?,
            _ => (0..=horizon).map(|t| eval_f(spec, t)).collect::<Result<Vec<_>>>()?,
        };
        for (t, &v) in f_values.iter().enumerate() {
            check_structure(spec, t as u64, v)?;
        }
        let mut prefix = Vec::with_capacity(f_values.len());
        prefix.push(0u64);
        for t in 1..=horizon as usize {
            let next = prefix[t - 1]
                .checked_add(f_values[t - 1])
                .ok_or(GrowthError::Overflow { t: t as u64 })?;
            prefix.push(next);
        }
        Ok(GrowthTable {
            spec: spec.clone(),
            f_values,
            prefix,
        })
    }

    pub fn spec(&self) -> &GrowthSpec {
        &self.spec
    }

    pub fn horizon(&self) -> u64 {
        self.f_values.len() as u64 - 1
    }

    pub fn v_prime(&self) -> u64 {
        self.spec.v_prime
    }

    pub fn f(&self, t: u64) -> Result<u64> {
        self.f_values.get(t as usize).copied().ok_or(GrowthError::OutOfRange {
            t,
            limit: self.horizon(),
        })
    }

    /// `F(t) = Σ_{i<t} f(i)`.
    pub fn prefix_f(&self, t: u64) -> Result<u64> {
        self.prefix.get(t as usize).copied().ok_or(GrowthError::OutOfRange {
            t,
            limit: self.horizon(),
        })
    }

    pub fn f_values(&self) -> &[u64] {
        &self.f_values
    }

    pub fn prefix_values(&self) -> &[u64] {
        &self.prefix
    }

    fn check_range(&self, m: u64, t: u64) -> Result<()> {
        if m > t {
            return Err(GrowthError::Domain(format!("lower limit {m} exceeds upper limit {t}")));
        }
        if t > self.horizon() {
            return Err(GrowthError::OutOfRange {
                t,
                limit: self.horizon(),
            });
        }
        if self.prefix[m as usize] == 0 {
            return Err(GrowthError::Domain(format!("F({m}) = 0")));
        }
        Ok(())
    }

    /// `∫_m^t f(s)/F(s)^β ds` for the step extension of `f`, exact on each
    /// unit interval where `F` is linear.
    pub fn integral_f_over_prefix_pow(&self, m: u64, t: u64, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        self.check_range(m, t)?;
        let mut acc = CompensatedSum::new();
        for s in m..t {
            let f = self.f_values[s as usize];
            if f == 0 {
                continue;
            }
            let lo = self.prefix[s as usize] as f64;
            let hi = self.prefix[s as usize + 1] as f64;
            let piece = if beta == 1.0 {
                (f as f64 / lo).ln_1p()
            } else {
                (lo.powf(1.0 - beta) - hi.powf(1.0 - beta)) / (beta - 1.0)
            };
            acc.add(piece);
        }
        Ok(acc.value())
    }

    /// `Σ_{s=m}^{t} f(s)/F(s)^β`.
    pub fn sum_f_over_prefix_pow(&self, m: u64, t: u64, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        self.check_range(m, t)?;
        let acc: CompensatedSum = (m..=t)
            .map(|s| self.f_values[s as usize] as f64 / (self.prefix[s as usize] as f64).powf(beta))
            .collect();
        Ok(acc.value())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 1.0 {
        return Err(GrowthError::Domain(format!("beta = {beta} must be ≥ 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionTolerances {
    /// Last `S2` doubling increment below this ⇒ converging hint.
    pub s2_converging_below: f64,
    /// Last `S1` doubling increment above this ⇒ diverging hint.
    pub s1_diverging_above: f64,
}

impl Default for AssumptionTolerances {
    fn default() -> Self {
        AssumptionTolerances {
            s2_converging_below: 1e-2,
            s1_diverging_above: 1e-1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S1Hint {
    S1Diverging,
    S1Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S2Hint {
    S2Converging,
    S2Inconclusive,
}

/// Heuristic verdicts; a finite computation cannot decide an infinite sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictHint {
    pub s1: S1Hint,
    pub s2: S2Hint,
}

/// Partial sums `S1(T) = Σ_{s≤T} f(s)/F(s)` and `S2(T) = Σ_{s≤T} (f(s)/F(s))²`
/// at checkpoints, with doubling increments `S(2T) − S(T)`. Terms with
/// `F(s) = 0` (only `s = 0`) are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    pub s1_partial: Vec<f64>,
    pub s2_partial: Vec<f64>,
    /// Checkpoints `T` with `2T ≤ horizon`, in order.
    pub doubling_points: Vec<u64>,
    pub s1_doubling_increments: Vec<f64>,
    pub s2_doubling_increments: Vec<f64>,
    pub verdict_hint: VerdictHint,
}

pub fn assumption_report(
    table: &GrowthTable,
    horizon: u64,
    checkpoints: &[u64],
    tolerances: &AssumptionTolerances,
) -> Result<AssumptionReport> {
    if horizon > table.horizon() {
        return Err(GrowthError::OutOfRange {
            t: horizon,
            limit: table.horizon(),
        });
    }
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let first = *sorted
        .first()
        .ok_or_else(|| GrowthError::Domain("at least one checkpoint is required".into()))?;
    if first < table.v_prime() || *sorted.last().unwrap() > horizon {
        return Err(GrowthError::Domain(format!(
            "checkpoints must lie in [{}, {horizon}]",
            table.v_prime()
        )));
    }
    if horizon < 2 * first {
        return Err(GrowthError::InsufficientRange {
            horizon,
            needed: 2 * first,
        });
    }

    let mut s1 = vec![0.0f64; horizon as usize + 1];
    let mut s2 = vec![0.0f64; horizon as usize + 1];
    let mut acc1 = CompensatedSum::new();
    let mut acc2 = CompensatedSum::new();
    for s in 1..=horizon as usize {
        let big_f = table.prefix[s];
        if big_f > 0 {
            let r = table.f_values[s] as f64 / big_f as f64;
            acc1.add(r);
            acc2.add(r * r);
        }
        s1[s] = acc1.value();
        s2[s] = acc2.value();
    }

    let s1_partial: Vec<f64> = sorted.iter().map(|&t| s1[t as usize]).collect();
    let s2_partial: Vec<f64> = sorted.iter().map(|&t| s2[t as usize]).collect();
    let doubling_points: Vec<u64> = sorted.iter().copied().filter(|&t| 2 * t <= horizon).collect();
    let s1_doubling_increments: Vec<f64> = doubling_points
        .iter()
        .map(|&t| s1[2 * t as usize] - s1[t as usize])
        .collect();
    let s2_doubling_increments: Vec<f64> = doubling_points
        .iter()
        .map(|&t| s2[2 * t as usize] - s2[t as usize])
        .collect();

    let last1 = *s1_doubling_increments.last().expect("first checkpoint doubles");
    let last2 = *s2_doubling_increments.last().expect("first checkpoint doubles");
    let verdict_hint = VerdictHint {
        s1: if last1 > tolerances.s1_diverging_above {
            S1Hint::S1Diverging
        } else {
            S1Hint::S1Inconclusive
        },
        s2: if last2 < tolerances.s2_converging_below {
            S2Hint::S2Converging
        } else {
            S2Hint::S2Inconclusive
        },
    };

    Ok(AssumptionReport {
        horizon,
        checkpoints: sorted,
        s1_partial,
        s2_partial,
        doubling_points,
        s1_doubling_increments,
        s2_doubling_increments,
        verdict_hint,
    })
}
