//! Real wave numbers: pointwise algebra over the generators
//! `w(f, θ) = ρ ↦ e^{i2π(fρ + θ)}`.
//!
//! Elements are expression trees. Evaluation is pointwise, so the field laws
//! hold at every `ρ` where no inverse meets a zero. Spin `f` and rotation `θ`
//! are tracked structurally: products and sums add them, inverses negate them.
//! Rotations are in turns here; the exponential-sum side uses radians and
//! [`lift_sum`] converts between the two.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Neg};

use num_complex::Complex64;
use thiserror::Error;

use crate::exactq::Rational;
use crate::expsum::ExpTerm;
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("parameter is not finite: {0}")]
    NonFinite(f64),
    #[error("pole at rho = {0}")]
    PoleAt(f64),
    #[error("term {index} has zero amplitude; lifting requires R\u{2080}\u{2096} > 0")]
    ZeroAmplitude { index: usize },
    #[error("{terms} terms but {spins} spins")]
    LengthMismatch { terms: usize, spins: usize },
}

/// A parameter that is either an exact rational or a float. Rational literals
/// stay exact so periodicity can be decided without guessing.
#[derive(Clone, Copy, PartialEq)]
pub enum Num {
    Exact(Rational),
    Float(f64),
}

impl Num {
    pub const ZERO: Num = Num::Exact(Rational::ZERO);

    pub fn to_f64(self) -> f64 {
        match self {
            Num::Exact(q) => q.to_f64(),
            Num::Float(x) => x,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Num::Exact(_))
    }

    fn check_finite(self) -> Result<Num, WaveError> {
        match self {
            Num::Float(x) if !x.is_finite() => Err(WaveError::NonFinite(x)),
            n => Ok(n),
        }
    }
}

impl fmt::Debug for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(q) => write!(f, "{q}"),
            Num::Float(x) => write!(f, "{x:?}"),
        }
    }
}

/// Exact when both sides are exact and the sum fits; float otherwise.
impl Add for Num {
    type Output = Num;

    fn add(self, other: Num) -> Num {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => match a.checked_add(&b) {
                Ok(s) => Num::Exact(s),
                Err(_) => Num::Float(a.to_f64() + b.to_f64()),
            },
            (a, b) => Num::Float(a.to_f64() + b.to_f64()),
        }
    }
}

impl Neg for Num {
    type Output = Num;

    fn neg(self) -> Num {
        match self {
            Num::Exact(a) => match a.checked_neg() {
                Ok(n) => Num::Exact(n),
                Err(_) => Num::Float(-a.to_f64()),
            },
            Num::Float(x) => Num::Float(-x),
        }
    }
}

impl From<Rational> for Num {
    fn from(q: Rational) -> Self {
        Num::Exact(q)
    }
}

impl From<i64> for Num {
    fn from(n: i64) -> Self {
        Num::Exact(Rational::integer(n))
    }
}

impl From<i32> for Num {
    fn from(n: i32) -> Self {
        Num::Exact(Rational::integer(i64::from(n)))
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num::Float(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WaveExpr {
    /// `w(spin, rotation)`.
    Gen {
        spin: Num,
        rotation: Num,
    },
    /// A fixed complex number; spin and rotation are both zero.
    Const {
        re: Num,
        im: Num,
    },
    Mul(Box<WaveExpr>, Box<WaveExpr>),
    Add(Box<WaveExpr>, Box<WaveExpr>),
    Inv(Box<WaveExpr>),
}

pub fn gen(spin: impl Into<Num>, rotation: impl Into<Num>) -> Result<WaveExpr, WaveError> {
    Ok(WaveExpr::Gen {
        spin: spin.into().check_finite()?,
        rotation: rotation.into().check_finite()?,
    })
}

pub fn constant(re: impl Into<Num>, im: impl Into<Num>) -> Result<WaveExpr, WaveError> {
    Ok(WaveExpr::Const {
        re: re.into().check_finite()?,
        im: im.into().check_finite()?,
    })
}

/// The multiplicative identity `w(0, 0)`.
pub fn one() -> WaveExpr {
    WaveExpr::Gen {
        spin: Num::ZERO,
        rotation: Num::ZERO,
    }
}

/// `w(0, 1/2)`, which evaluates to `-1` everywhere.
pub fn minus_one() -> WaveExpr {
    WaveExpr::Gen {
        spin: Num::ZERO,
        rotation: Num::Exact(half()),
    }
}

fn half() -> Rational {
    Rational::new(1, 2).expect("1/2 is a valid rational")
}

pub fn mul(a: WaveExpr, b: WaveExpr) -> WaveExpr {
    WaveExpr::Mul(Box::new(a), Box::new(b))
}

pub fn add(a: WaveExpr, b: WaveExpr) -> WaveExpr {
    WaveExpr::Add(Box::new(a), Box::new(b))
}

pub fn inv(a: WaveExpr) -> WaveExpr {
    WaveExpr::Inv(Box::new(a))
}

pub fn div(a: WaveExpr, b: WaveExpr) -> WaveExpr {
    mul(a, inv(b))
}

/// Additive inverse: multiplication by `w(0, 1/2)`.
pub fn neg(a: WaveExpr) -> WaveExpr {
    mul(minus_one(), a)
}

/// `e^{i2πt}`. Whole turns are removed first so large phases keep their
/// fractional accuracy, and quarter turns are returned exactly.
pub fn unit_turns(turns: f64) -> Complex64 {
    let frac = turns - turns.round() + 0.0;
    let quarters = frac * 4.0;
    if quarters == quarters.round() {
        return match quarters as i32 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            -1 => Complex64::new(0.0, -1.0),
            _ => Complex64::new(-1.0, 0.0),
        };
    }
    Complex64::from_polar(1.0, TAU * frac)
}

/// Pointwise value at `rho`. An inverse whose argument is exactly zero, or a
/// result that overflows, is reported as a pole.
pub fn eval(e: &WaveExpr, rho: f64) -> Result<Complex64, WaveError> {
    let v = match e {
        WaveExpr::Gen { spin, rotation } => unit_turns(spin.to_f64() * rho + rotation.to_f64()),
        WaveExpr::Const { re, im } => Complex64::new(re.to_f64(), im.to_f64()),
        WaveExpr::Mul(a, b) => eval(a, rho)? * eval(b, rho)?,
        WaveExpr::Add(a, b) => eval(a, rho)? + eval(b, rho)?,
        WaveExpr::Inv(a) => {
            let v = eval(a, rho)?;
            if v == Complex64::new(0.0, 0.0) {
                return Err(WaveError::PoleAt(rho));
            }
            v.inv()
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(WaveError::PoleAt(rho))
    }
}

/// A value together with a first-order bound on its rounding error, in units
/// of machine epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: Complex64,
    /// Always at least `|value|`.
    pub scale: f64,
}

/// [`eval`] with error-scale propagation: leaves have scale `|value|`, sums
/// add scales, products use `|a| s_b + s_a |b|`, and an inverse of `v` has
/// scale `s_v / |v|²`. Inverting a value with `s_v / |v|` above
/// [`tolerance::POLE_CONDITION`] counts as a pole.
pub fn eval_conditioned(e: &WaveExpr, rho: f64) -> Result<Sample, WaveError> {
    let s = match e {
        WaveExpr::Gen { .. } | WaveExpr::Const { .. } => {
            let value = eval(e, rho)?;
            Sample {
                value,
                scale: value.norm(),
            }
        }
        WaveExpr::Mul(a, b) => {
            let (a, b) = (eval_conditioned(a, rho)?, eval_conditioned(b, rho)?);
            let value = a.value * b.value;
            Sample {
                value,
                scale: (a.value.norm() * b.scale + a.scale * b.value.norm()).max(value.norm()),
            }
        }
        WaveExpr::Add(a, b) => {
            let (a, b) = (eval_conditioned(a, rho)?, eval_conditioned(b, rho)?);
            Sample {
                value: a.value + b.value,
                scale: a.scale + b.scale,
            }
        }
        WaveExpr::Inv(a) => {
            let a = eval_conditioned(a, rho)?;
            let m = a.value.norm();
            if m == 0.0 || a.scale > tolerance::POLE_CONDITION * m {
                return Err(WaveError::PoleAt(rho));
            }
            let value = a.value.inv();
            Sample {
                value,
                scale: (a.scale / (m * m)).max(value.norm()),
            }
        }
    };
    if s.value.is_finite() && s.scale.is_finite() {
        Ok(s)
    } else {
        Err(WaveError::PoleAt(rho))
    }
}

/// Spin and rotation of an expression, by structural recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinRotation {
    pub spin: Num,
    pub rotation: Num,
}

impl SpinRotation {
    pub const ZERO: SpinRotation = SpinRotation {
        spin: Num::ZERO,
        rotation: Num::ZERO,
    };
}

impl Add for SpinRotation {
    type Output = SpinRotation;

    fn add(self, other: SpinRotation) -> SpinRotation {
        SpinRotation {
            spin: self.spin + other.spin,
            rotation: self.rotation + other.rotation,
        }
    }
}

impl Neg for SpinRotation {
    type Output = SpinRotation;

    fn neg(self) -> SpinRotation {
        SpinRotation {
            spin: -self.spin,
            rotation: -self.rotation,
        }
    }
}

pub fn spin_rotation(e: &WaveExpr) -> SpinRotation {
    match e {
        WaveExpr::Gen { spin, rotation } => SpinRotation {
            spin: *spin,
            rotation: *rotation,
        },
        WaveExpr::Const { .. } => SpinRotation::ZERO,
        WaveExpr::Mul(a, b) | WaveExpr::Add(a, b) => spin_rotation(a) + spin_rotation(b),
        WaveExpr::Inv(a) => -spin_rotation(a),
    }
}

pub fn spin(e: &WaveExpr) -> f64 {
    spin_rotation(e).spin.to_f64()
}

/// Rotation in turns.
pub fn rotation(e: &WaveExpr) -> f64 {
    spin_rotation(e).rotation.to_f64()
}

/// `e = amp ⊗ w(spin, rotation)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveCanonical {
    pub amp: WaveExpr,
    pub spin: Num,
    pub rotation: Num,
}

impl WaveCanonical {
    pub fn generator(&self) -> WaveExpr {
        WaveExpr::Gen {
            spin: self.spin,
            rotation: self.rotation,
        }
    }

    /// `amp(ρ) · w(spin, rotation)(ρ)`.
    pub fn reconstruct(&self, rho: f64) -> Result<Complex64, WaveError> {
        Ok(eval(&self.amp, rho)? * eval(&self.generator(), rho)?)
    }
}

/// Splits off the generator part `w(f, θ)` given by the structural spin and
/// rotation. Pure products and inverses of generators have amplitude exactly
/// one; anything else keeps `amp = e ⊘ w(f, θ)` unnormalized.
pub fn canonicalize(e: &WaveExpr) -> WaveCanonical {
    let SpinRotation { spin, rotation } = spin_rotation(e);
    let amp = if is_generator_monomial(e) {
        WaveExpr::Const {
            re: Num::from(1),
            im: Num::ZERO,
        }
    } else {
        div(e.clone(), WaveExpr::Gen { spin, rotation })
    };
    WaveCanonical {
        amp,
        spin,
        rotation,
    }
}

fn is_generator_monomial(e: &WaveExpr) -> bool {
    match e {
        WaveExpr::Gen { .. } => true,
        WaveExpr::Mul(a, b) => is_generator_monomial(a) && is_generator_monomial(b),
        WaveExpr::Inv(a) => is_generator_monomial(a),
        WaveExpr::Const { .. } | WaveExpr::Add(..) => false,
    }
}

/// Evaluation at `ρ = 0`. For a generator this is `e^{i2πθ}` whatever the
/// spin, so the spin is lost.
pub fn project(e: &WaveExpr) -> Result<Complex64, WaveError> {
    eval(e, 0.0)
}

/// Builds `⊕_k r_k ⊗ w(f_k, θ_k / 2π)`, whose projection is the exponential
/// sum of `terms`. Each amplitude is a constant leaf, so it carries no spin or
/// rotation.
pub fn lift_sum(terms: &[ExpTerm], spins: &[f64]) -> Result<WaveExpr, WaveError> {
    if terms.len() != spins.len() {
        return Err(WaveError::LengthMismatch {
            terms: terms.len(),
            spins: spins.len(),
        });
    }
    let mut lifted: Option<WaveExpr> = None;
    for (index, (t, &f)) in terms.iter().zip(spins).enumerate() {
        if t.r() <= 0.0 {
            return Err(WaveError::ZeroAmplitude { index });
        }
        let term = mul(constant(t.r(), 0)?, gen(f, t.theta() / TAU)?);
        lifted = Some(match lifted {
            Some(acc) => add(acc, term),
            None => term,
        });
    }
    match lifted {
        Some(e) => Ok(e),
        None => constant(0, 0),
    }
}

impl WaveExpr {
    /// Spins of every generator leaf, left to right.
    pub fn generator_spins(&self) -> Vec<Num> {
        let mut out = Vec::new();
        self.collect_spins(&mut out);
        out
    }

    fn collect_spins(&self, out: &mut Vec<Num>) {
        match self {
            WaveExpr::Gen { spin, .. } => out.push(*spin),
            WaveExpr::Const { .. } => {}
            WaveExpr::Mul(a, b) | WaveExpr::Add(a, b) => {
                a.collect_spins(out);
                b.collect_spins(out);
            }
            WaveExpr::Inv(a) => a.collect_spins(out),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            WaveExpr::Gen { .. } | WaveExpr::Const { .. } => 0,
            WaveExpr::Mul(a, b) | WaveExpr::Add(a, b) => 1 + a.depth().max(b.depth()),
            WaveExpr::Inv(a) => 1 + a.depth(),
        }
    }
}

/// Number of Chebyshev-spaced points in the sample grid.
pub const GRID_CHEBYSHEV: usize = 32;
/// Number of seeded uniform points in the sample grid.
pub const GRID_RANDOM: usize = 32;
/// Half-width of the sampled `ρ` interval.
pub const GRID_HALF_WIDTH: f64 = 4.0;

/// 32 Chebyshev nodes on `[-4, 4]` followed by 32 uniform draws from the same
/// interval, seeded by `seed`.
pub fn sample_grid(seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = GRID_CHEBYSHEV as f64;
    (0..GRID_CHEBYSHEV)
        .map(|k| GRID_HALF_WIDTH * ((2 * k + 1) as f64 * PI / (2.0 * n)).cos())
        .chain((0..GRID_RANDOM).map(|_| rng.random_range(-GRID_HALF_WIDTH..=GRID_HALF_WIDTH)))
        .collect()
}
