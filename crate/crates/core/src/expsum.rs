//! Canonical representations of finite sums `S_n = Σ r_k e^{iθ_k}`.
//!
//! Four constructions are provided, each selectable by [`Method`]:
//!
//! * [`canon_leave_one_out`]: `A_n = (Π r_j) Σ_j exp(-i Σ_{k≠j} (-i ln r_k + θ_k))`
//! * [`canon_recursive`]: `A_n = A_{n-1} e^{-iθ_n} + r_n e^{-i Σ_{j<n} θ_j}`, `A_0 = 0`
//! * [`canon_nested_cosine`]: the two-phasor cosine identity applied to each
//!   step of the recursive form, giving `n` levels of nested cosines
//! * [`canon_sigma`]: `S_n = A_n e^{iσ_n}` with the binary-weighted phase
//!   `σ_n = (σ_{n-1} + θ_n) / 2`
//!
//! The first three share the phase `φ = Σ θ_j`, so `S_n = A_n e^{iφ}` and their
//! amplitudes agree. [`sum_direct`] is the plain left-to-right summation that
//! every construction is checked against.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerance;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpSumError {
    #[error("term {index}: amplitude must be finite and non-negative (got {r})")]
    InvalidAmplitude { index: usize, r: f64 },
    #[error("term {index}: phase must be finite (got {theta})")]
    InvalidPhase { index: usize, theta: f64 },
    #[error(
        "term {index} has zero amplitude; this form requires R\u{2080}\u{2096} > 0 for every term"
    )]
    ZeroAmplitude { index: usize },
    #[error("every amplitude is zero; the sigma form needs at least one R\u{2080}\u{2096} > 0")]
    AllZero,
    #[error("shift {k} out of range for {len} terms")]
    IndexOutOfRange { k: usize, len: usize },
    #[error("|S_n| = {magnitude:e} is below the cancellation threshold {threshold:e}")]
    NearCancellation { magnitude: f64, threshold: f64 },
}

/// One summand `r e^{iθ}` with `r ≥ 0` and `θ` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    r: f64,
    theta: f64,
}

impl ExpTerm {
    pub fn new(r: f64, theta: f64) -> Result<Self, ExpSumError> {
        if !r.is_finite() || r < 0.0 {
            return Err(ExpSumError::InvalidAmplitude { index: 0, r });
        }
        if !theta.is_finite() {
            return Err(ExpSumError::InvalidPhase { index: 0, theta });
        }
        Ok(Self { r, theta })
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

/// A complex coefficient rewritten as a non-negative amplitude with its
/// argument folded into the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedTerm {
    /// `|c|`.
    pub r: f64,
    /// `θ + phase_shift`, the phase of the equivalent non-negative term.
    pub theta: f64,
    /// `arg(c)` in `(-π, π]`; zero when `c = 0`.
    pub phase_shift: f64,
}

impl NormalizedTerm {
    pub fn is_zero(&self) -> bool {
        self.r == 0.0
    }

    pub fn to_term(&self) -> ExpTerm {
        ExpTerm {
            r: self.r,
            theta: self.theta,
        }
    }
}

/// Rewrites `c e^{iθ}` as `|c| e^{i(θ + arg c)}`.
pub fn normalize_term(c: Complex64, theta: f64) -> NormalizedTerm {
    let r = c.norm();
    if r == 0.0 {
        return NormalizedTerm {
            r: 0.0,
            theta,
            phase_shift: 0.0,
        };
    }
    // `+ 0.0` folds a negative-zero imaginary part so that real negative
    // coefficients map to +π rather than -π.
    let phase_shift = (c.im + 0.0).atan2(c.re);
    NormalizedTerm {
        r,
        theta: theta + phase_shift,
        phase_shift,
    }
}

/// `S_n = A e^{iφ}`, where `φ` carries the total phase `Σ θ_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub amplitude: Complex64,
    pub phase: f64,
}

impl CanonicalForm {
    pub fn reconstruct(&self) -> Complex64 {
        self.amplitude * Complex64::from_polar(1.0, self.phase)
    }
}

/// `S_n = A e^{iσ}` with the binary-weighted phase average `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaForm {
    pub amplitude: Complex64,
    pub sigma: f64,
}

impl SigmaForm {
    pub fn reconstruct(&self) -> Complex64 {
        self.amplitude * Complex64::from_polar(1.0, self.sigma)
    }
}

/// Neumaier's variant of compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `Σ θ_j` in input order, with compensated accumulation.
pub fn phase_sum(terms: &[ExpTerm]) -> f64 {
    terms
        .iter()
        .map(|t| t.theta)
        .collect::<CompensatedSum>()
        .value()
}

/// `Σ r_j`, the scale that absolute tolerances are measured against.
pub fn amplitude_sum(terms: &[ExpTerm]) -> f64 {
    terms
        .iter()
        .map(|t| t.r)
        .collect::<CompensatedSum>()
        .value()
}

/// Prefix phases: element `j` is `Σ_{k<j} θ_k`, so the result has `n + 1`
/// entries and the last is the total.
fn prefix_phases(terms: &[ExpTerm]) -> Vec<f64> {
    let mut acc = CompensatedSum::default();
    let mut out = Vec::with_capacity(terms.len() + 1);
    out.push(0.0);
    for t in terms {
        acc.add(t.theta);
        out.push(acc.value());
    }
    out
}

fn require_positive(terms: &[ExpTerm]) -> Result<(), ExpSumError> {
    match terms.iter().position(|t| t.r <= 0.0) {
        Some(index) => Err(ExpSumError::ZeroAmplitude { index }),
        None => Ok(()),
    }
}

/// Plain left-to-right summation of `r_k e^{iθ_k}`.
pub fn sum_direct(terms: &[ExpTerm]) -> Complex64 {
    terms
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t.value())
}

/// `e^{iθ₁} + e^{iθ₂} = 2 cos((θ₁-θ₂)/2) e^{i(θ₁+θ₂)/2}`.
pub fn two_term_sum(theta1: f64, theta2: f64) -> CanonicalForm {
    CanonicalForm {
        amplitude: Complex64::new(2.0 * ((theta1 - theta2) / 2.0).cos(), 0.0),
        phase: (theta1 + theta2) / 2.0,
    }
}

/// Leave-one-out form: every amplitude enters through its logarithm, so all
/// `r_k` must be strictly positive.
pub fn canon_leave_one_out(terms: &[ExpTerm]) -> Result<CanonicalForm, ExpSumError> {
    require_positive(terms)?;
    let n = terms.len();
    if n == 0 {
        return Ok(CanonicalForm {
            amplitude: Complex64::new(0.0, 0.0),
            phase: 0.0,
        });
    }

    // prefix[j] covers terms[..j], suffix[j] covers terms[j..].
    let mut log_prefix = vec![0.0; n + 1];
    let mut phase_prefix = vec![0.0; n + 1];
    let (mut lp, mut pp) = (CompensatedSum::default(), CompensatedSum::default());
    for (j, t) in terms.iter().enumerate() {
        lp.add(t.r.ln());
        pp.add(t.theta);
        log_prefix[j + 1] = lp.value();
        phase_prefix[j + 1] = pp.value();
    }
    let mut log_suffix = vec![0.0; n + 1];
    let mut phase_suffix = vec![0.0; n + 1];
    let (mut ls, mut ps) = (CompensatedSum::default(), CompensatedSum::default());
    for (j, t) in terms.iter().enumerate().rev() {
        ls.add(t.r.ln());
        ps.add(t.theta);
        log_suffix[j] = ls.value();
        phase_suffix[j] = ps.value();
    }

    let log_product = log_prefix[n];
    let mut amplitude = Complex64::new(0.0, 0.0);
    for j in 0..n {
        // exponent Σ_{k≠j} (-i ln r_k + θ_k)
        let others = Complex64::new(
            phase_prefix[j] + phase_suffix[j + 1],
            -(log_prefix[j] + log_suffix[j + 1]),
        );
        // Π r_j is carried in the exponent as ln Π r_j so long products
        // cannot overflow before the leave-one-out factor divides them back.
        amplitude += (-I * others + log_product).exp();
    }
    Ok(CanonicalForm {
        amplitude,
        phase: phase_prefix[n],
    })
}

/// Log-free recursion. Zero amplitudes are allowed and contribute nothing.
pub fn canon_recursive(terms: &[ExpTerm]) -> CanonicalForm {
    let phases = prefix_phases(terms);
    let mut amplitude = Complex64::new(0.0, 0.0);
    for (n, t) in terms.iter().enumerate() {
        amplitude = recursive_step(amplitude, t, phases[n]);
    }
    CanonicalForm {
        amplitude,
        phase: phases[terms.len()],
    }
}

#[inline]
fn recursive_step(prev: Complex64, term: &ExpTerm, phase_before: f64) -> Complex64 {
    prev * Complex64::from_polar(1.0, -term.theta) + Complex64::from_polar(term.r, -phase_before)
}

/// One nested-cosine step: `A_n` from `A_{n-1}` and the term `r e^{iθ}`.
///
/// `phase_before` is `Σ_{j<n} θ_j` and `phase_through` is `Σ_{j≤n} θ_j`.
/// `branch` selects `ln A_{n-1} + 2πi·branch`; the square root and the cosine
/// both derive from that one log value, so the result does not depend on it.
pub fn nested_cosine_step(
    prev: Complex64,
    r: f64,
    theta: f64,
    phase_before: f64,
    phase_through: f64,
    branch: i32,
) -> Complex64 {
    let log_prev = prev.ln() + Complex64::new(0.0, TAU * f64::from(branch));
    let ln_r = r.ln();
    let root = ((log_prev + ln_r) * 0.5).exp();
    let arg = (-I * (log_prev - ln_r) + (phase_before - theta)) * 0.5;
    2.0 * root * arg.cos() * Complex64::from_polar(1.0, -phase_through / 2.0)
}

/// The nested-cosine step exactly as it is usually printed: no factor 2 and
/// `Σ_{j≤n} θ_j - θ_n` inside the cosine. It does not reproduce the sum and is
/// kept only so the regression tests can demonstrate that.
pub fn nested_cosine_step_uncorrected(
    prev: Complex64,
    r: f64,
    theta: f64,
    phase_through: f64,
    branch: i32,
) -> Complex64 {
    let log_prev = prev.ln() + Complex64::new(0.0, TAU * f64::from(branch));
    let ln_r = r.ln();
    let root = ((log_prev + ln_r) * 0.5).exp();
    let arg = (-I * (log_prev - ln_r) + (phase_through - theta)) * 0.5;
    root * arg.cos() * Complex64::from_polar(1.0, -phase_through / 2.0)
}

fn below_cancellation(prev: Complex64, scale: f64) -> bool {
    prev == Complex64::new(0.0, 0.0) || prev.norm() < tolerance::CANCELLATION * scale
}

/// Nested-cosine form of the recursive amplitude. Steps whose running
/// amplitude has cancelled below [`tolerance::CANCELLATION`] fall back to the
/// log-free update.
pub fn canon_nested_cosine(terms: &[ExpTerm]) -> Result<CanonicalForm, ExpSumError> {
    nested_cosine_with(terms, |prev, t, before, through| {
        nested_cosine_step(prev, t.r, t.theta, before, through, 0)
    })
}

/// [`canon_nested_cosine`] built on [`nested_cosine_step_uncorrected`].
pub fn canon_nested_cosine_uncorrected(terms: &[ExpTerm]) -> Result<CanonicalForm, ExpSumError> {
    nested_cosine_with(terms, |prev, t, _, through| {
        nested_cosine_step_uncorrected(prev, t.r, t.theta, through, 0)
    })
}

fn nested_cosine_with(
    terms: &[ExpTerm],
    step: impl Fn(Complex64, &ExpTerm, f64, f64) -> Complex64,
) -> Result<CanonicalForm, ExpSumError> {
    require_positive(terms)?;
    let phases = prefix_phases(terms);
    let mut amplitude = Complex64::new(0.0, 0.0);
    let mut scale = CompensatedSum::default();
    for (n, t) in terms.iter().enumerate() {
        amplitude = if n == 0 || below_cancellation(amplitude, scale.value()) {
            recursive_step(amplitude, t, phases[n])
        } else {
            step(amplitude, t, phases[n], phases[n + 1])
        };
        scale.add(t.r);
    }
    Ok(CanonicalForm {
        amplitude,
        phase: phases[terms.len()],
    })
}

/// One step of the sigma form: `A_n` from `A_{n-1}`, `σ_{n-1}` and `r e^{iθ}`.
/// `branch` plays the same role as in [`nested_cosine_step`].
pub fn sigma_step(prev: Complex64, r: f64, theta: f64, sigma_prev: f64, branch: i32) -> Complex64 {
    let log_prev = prev.ln() + Complex64::new(0.0, TAU * f64::from(branch));
    let ln_r = r.ln();
    let root = ((log_prev + ln_r) * 0.5).exp();
    let arg = -I * (log_prev - ln_r) * 0.5 + (sigma_prev - theta) * 0.5;
    root * 2.0 * arg.cos()
}

/// Sigma form. The phase always follows `σ_n = (σ_{n-1} + θ_n)/2`; steps with
/// a zero amplitude or a cancelled running amplitude use the log-free update
/// `A_n = A_{n-1} e^{i(σ_{n-1}-σ_n)} + r_n e^{i(θ_n-σ_n)}`.
pub fn canon_sigma(terms: &[ExpTerm]) -> Result<SigmaForm, ExpSumError> {
    let Some((first, rest)) = terms.split_first() else {
        return Ok(SigmaForm {
            amplitude: Complex64::new(0.0, 0.0),
            sigma: 0.0,
        });
    };
    if terms.iter().all(|t| t.r == 0.0) {
        return Err(ExpSumError::AllZero);
    }
    let mut amplitude = Complex64::new(first.r, 0.0);
    let mut sigma = first.theta;
    let mut scale = first.r;
    for t in rest {
        let next_sigma = (sigma + t.theta) / 2.0;
        amplitude = if t.r == 0.0 || below_cancellation(amplitude, scale) {
            amplitude * Complex64::from_polar(1.0, sigma - next_sigma)
                + Complex64::from_polar(t.r, t.theta - next_sigma)
        } else {
            sigma_step(amplitude, t.r, t.theta, sigma, 0)
        };
        sigma = next_sigma;
        scale += t.r;
    }
    Ok(SigmaForm { amplitude, sigma })
}

/// Moves the residual phase `σ - Σθ` into the amplitude so the sigma form
/// takes the shared canonical phase.
pub fn sigma_to_canonical(s: SigmaForm, sum_theta: f64) -> CanonicalForm {
    CanonicalForm {
        amplitude: s.amplitude * Complex64::from_polar(1.0, s.sigma - sum_theta),
        phase: sum_theta,
    }
}

/// Rotates the term list left by `k`.
pub fn cyclic_shift(terms: &[ExpTerm], k: usize) -> Result<Vec<ExpTerm>, ExpSumError> {
    if k >= terms.len() {
        return Err(ExpSumError::IndexOutOfRange {
            k,
            len: terms.len(),
        });
    }
    let mut out = terms.to_vec();
    out.rotate_left(k);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CyclicReport {
    pub n: usize,
    pub direct: Complex64,
    /// `Π_k S(shift(T, k))`.
    pub product: Complex64,
    /// `S^n`.
    pub power: Complex64,
    /// `|product - power| / |power|`.
    pub relative_error: f64,
    pub principal_root: Complex64,
    /// `m` such that `S ≈ principal_root · e^{2πim/n}`.
    pub root_index: usize,
    /// `|principal_root · e^{2πim/n} - S| / |S|`.
    pub root_error: f64,
}

/// Checks that the product of all cyclic shifts equals `S_n^n` and finds the
/// root of unity relating the principal `n`-th root of that product to `S_n`.
pub fn cyclic_product_check(terms: &[ExpTerm]) -> Result<CyclicReport, ExpSumError> {
    let n = terms.len();
    let direct = sum_direct(terms);
    let threshold = tolerance::NEAR_CANCELLATION * amplitude_sum(terms);
    if n == 0 || direct.norm() <= threshold {
        return Err(ExpSumError::NearCancellation {
            magnitude: direct.norm(),
            threshold,
        });
    }

    let mut product = Complex64::new(1.0, 0.0);
    for k in 0..n {
        product *= sum_direct(&cyclic_shift(terms, k)?);
    }
    let power = direct.powu(n as u32);
    let relative_error = (product - power).norm() / power.norm();

    let principal_root = (product.ln() / n as f64).exp();
    let turns = (direct / principal_root).arg() / TAU * n as f64;
    let root_index = (turns.round() as i64).rem_euclid(n as i64) as usize;
    let unity = Complex64::from_polar(1.0, TAU * root_index as f64 / n as f64);
    let root_error = (principal_root * unity - direct).norm() / direct.norm();

    Ok(CyclicReport {
        n,
        direct,
        product,
        power,
        relative_error,
        principal_root,
        root_index,
        root_error,
    })
}

/// Selects one of the four canonical constructions. The names match the CLI's
/// `--method` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// [`canon_leave_one_out`]
    Prop1,
    /// [`canon_recursive`]
    Prop2,
    /// [`canon_nested_cosine`]
    Prop3,
    /// [`canon_sigma`]
    Prop4,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Prop1, Method::Prop2, Method::Prop3, Method::Prop4];

    pub fn name(self) -> &'static str {
        match self {
            Method::Prop1 => "prop1",
            Method::Prop2 => "prop2",
            Method::Prop3 => "prop3",
            Method::Prop4 => "prop4",
        }
    }

    pub fn canonicalize(self, terms: &[ExpTerm]) -> Result<Representation, ExpSumError> {
        Ok(match self {
            Method::Prop1 => Representation::Canonical(canon_leave_one_out(terms)?),
            Method::Prop2 => Representation::Canonical(canon_recursive(terms)),
            Method::Prop3 => Representation::Canonical(canon_nested_cosine(terms)?),
            Method::Prop4 => Representation::Sigma(canon_sigma(terms)?),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected prop1, prop2, prop3 or prop4)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation {
    Canonical(CanonicalForm),
    Sigma(SigmaForm),
}

impl Representation {
    pub fn amplitude(&self) -> Complex64 {
        match self {
            Representation::Canonical(c) => c.amplitude,
            Representation::Sigma(s) => s.amplitude,
        }
    }

    pub fn reconstruct(&self) -> Complex64 {
        match self {
            Representation::Canonical(c) => c.reconstruct(),
            Representation::Sigma(s) => s.reconstruct(),
        }
    }
}

/// Validates a list of `(r, θ)` pairs, reporting the offending index.
pub fn terms_from_pairs(pairs: &[(f64, f64)]) -> Result<Vec<ExpTerm>, ExpSumError> {
    pairs
        .iter()
        .enumerate()
        .map(|(index, &(r, theta))| {
            ExpTerm::new(r, theta).map_err(|e| match e {
                ExpSumError::InvalidAmplitude { r, .. } => {
                    ExpSumError::InvalidAmplitude { index, r }
                }
                ExpSumError::InvalidPhase { theta, .. } => {
                    ExpSumError::InvalidPhase { index, theta }
                }
                other => other,
            })
        })
        .collect()
}
