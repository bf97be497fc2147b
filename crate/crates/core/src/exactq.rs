//! Exact rationals and the periodic subfield.
//!
//! A finite combination of generators `w(f_j, θ_j)` is periodic when every
//! spin is rational: the period of `w(f, ·)` is `1/|f|` and the combination
//! repeats at the least common multiple of those periods. Float spins never
//! take part in that decision.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::tolerance;
use crate::wave::{self, Num, WaveExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow in rational arithmetic")]
    Overflow,
    #[error("{0} is not positive")]
    NonPositive(Rational),
    #[error("invalid rational literal `{0}`")]
    Parse(String),
}

/// `num/den` in lowest terms with `den > 0`; zero is `0/1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    pub fn new(num: i64, den: i64) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::DivisionByZero);
        }
        // Reducing or flipping the sign of i64::MIN overflows.
        if num == i64::MIN || den == i64::MIN {
            return Err(RationalError::Overflow);
        }
        Ok(Rational(Ratio::new(num, den)))
    }

    pub fn integer(n: i64) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn num(&self) -> i64 {
        *self.0.numer()
    }

    pub fn den(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.num() as f64 / self.den() as f64
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, RationalError> {
        self.0
            .checked_add(&other.0)
            .map(Rational)
            .ok_or(RationalError::Overflow)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, RationalError> {
        self.0
            .checked_sub(&other.0)
            .map(Rational)
            .ok_or(RationalError::Overflow)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, RationalError> {
        self.0
            .checked_mul(&other.0)
            .map(Rational)
            .ok_or(RationalError::Overflow)
    }

    pub fn checked_neg(&self) -> Result<Self, RationalError> {
        self.num()
            .checked_neg()
            .map(|n| Rational(Ratio::new_raw(n, self.den())))
            .ok_or(RationalError::Overflow)
    }

    pub fn checked_inv(&self) -> Result<Self, RationalError> {
        if self.is_zero() {
            return Err(RationalError::DivisionByZero);
        }
        Rational::new(self.den(), self.num())
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }
}

pub fn rat_add(a: Rational, b: Rational) -> Result<Rational, RationalError> {
    a.checked_add(&b)
}

pub fn rat_mul(a: Rational, b: Rational) -> Result<Rational, RationalError> {
    a.checked_mul(&b)
}

pub fn rat_neg(a: Rational) -> Result<Rational, RationalError> {
    a.checked_neg()
}

pub fn rat_inv(a: Rational) -> Result<Rational, RationalError> {
    a.checked_inv()
}

/// Smallest positive rational that is an integer multiple of both `a` and
/// `b`: `lcm(p₁, p₂) / gcd(q₁, q₂)` for `a = p₁/q₁`, `b = p₂/q₂`.
pub fn rat_lcm(a: Rational, b: Rational) -> Result<Rational, RationalError> {
    for x in [a, b] {
        if !x.is_positive() {
            return Err(RationalError::NonPositive(x));
        }
    }
    let g = a.num().gcd(&b.num());
    let num = (a.num() / g)
        .checked_mul(b.num())
        .ok_or(RationalError::Overflow)?;
    Rational::new(num, a.den().gcd(&b.den()))
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den() == 1 {
            write!(f, "{}", self.num())
        } else {
            write!(f, "{}/{}", self.num(), self.den())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `p`, `-p` or `p/q` with `q > 0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Parse(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let digits = num.strip_prefix('-').unwrap_or(num);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: i64 = num.parse().map_err(|_| bad())?;
        let den: i64 = match den {
            Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) => {
                d.parse().map_err(|_| bad())?
            }
            Some(_) => return Err(bad()),
            None => 1,
        };
        Rational::new(num, den)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodStatus {
    Periodic,
    Constant,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodReport {
    pub status: PeriodStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodError {
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(
        "period {period} failed numeric confirmation at rho = {rho} (relative error {error:e})"
    )]
    VerificationFailed {
        period: Rational,
        rho: f64,
        error: f64,
    },
}

/// Number of seeded samples used to confirm a period.
pub const PERIOD_SAMPLES: usize = 64;
const PERIOD_SEED: u64 = 0x5eed_9e71_0d1c;

/// The seeded `ρ` samples in `[-4, 4]` used to confirm periods.
pub fn period_samples() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(PERIOD_SEED);
    (0..PERIOD_SAMPLES)
        .map(|_| rng.random_range(-4.0..=4.0))
        .collect()
}

/// Largest `|e(ρ + T) - e(ρ)| / max(1, |e(ρ)|)` over the samples where both
/// sides are defined, with the number of samples skipped as poles.
pub fn periodicity_error(
    expr: &WaveExpr,
    period: f64,
    samples: &[f64],
) -> (f64, Option<f64>, usize) {
    let mut worst = 0.0_f64;
    let mut worst_rho = None;
    let mut poles = 0;
    for &rho in samples {
        let (Ok(a), Ok(b)) = (
            wave::eval_conditioned(expr, rho),
            wave::eval_conditioned(expr, rho + period),
        ) else {
            poles += 1;
            continue;
        };
        let err = (b.value - a.value).norm() / a.value.norm().max(1.0);
        if worst_rho.is_none() || err > worst {
            worst = err;
            worst_rho = Some(rho);
        }
    }
    (worst, worst_rho, poles)
}

/// Decides periodicity from the generator spins and confirms the result at
/// [`PERIOD_SAMPLES`] seeded points.
pub fn periodicity(expr: &WaveExpr) -> Result<PeriodReport, PeriodError> {
    let mut periods = Vec::new();
    for spin in expr.generator_spins() {
        match spin {
            Num::Exact(q) if q.is_zero() => {}
            Num::Exact(q) => periods.push(q.abs().checked_inv()?),
            Num::Float(0.0) => {}
            Num::Float(_) => {
                return Ok(PeriodReport {
                    status: PeriodStatus::Unknown,
                    period: None,
                })
            }
        }
    }
    let Some((first, rest)) = periods.split_first() else {
        return Ok(PeriodReport {
            status: PeriodStatus::Constant,
            period: None,
        });
    };
    let period = rest.iter().try_fold(*first, |acc, p| rat_lcm(acc, *p))?;

    let (error, rho, _) = periodicity_error(expr, period.to_f64(), &period_samples());
    if error > tolerance::PERIOD_RELATIVE {
        return Err(PeriodError::VerificationFailed {
            period,
            rho: rho.unwrap_or(f64::NAN),
            error,
        });
    }
    Ok(PeriodReport {
        status: PeriodStatus::Periodic,
        period: Some(period),
    })
}
