//! Random inputs for the verification suites.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::exactq::Rational;
use crate::expsum::ExpTerm;
use crate::wave::{self, Num, WaveExpr};

/// `n ~ U[1, n_max]`, `r` log-uniform in `r_range`, `θ ~ U[-π, π]`.
pub fn terms<R: Rng>(rng: &mut R, n_max: usize, r_range: (f64, f64)) -> Vec<ExpTerm> {
    let n = rng.random_range(1..=n_max.max(1));
    let (lo, hi) = (r_range.0.ln(), r_range.1.ln());
    (0..n)
        .map(|_| {
            let r = if lo < hi {
                rng.random_range(lo..hi).exp()
            } else {
                r_range.0
            };
            let theta = rng.random_range(-PI..=PI);
            ExpTerm::new(r, theta).expect("drawn terms are finite and positive")
        })
        .collect()
}

pub fn permutation<R: Rng>(rng: &mut R, terms: &[ExpTerm]) -> Vec<ExpTerm> {
    let mut out = terms.to_vec();
    out.shuffle(rng);
    out
}

/// `p/q` with `|p| ≤ max_num` and `1 ≤ q ≤ max_den`.
pub fn small_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    let p = rng.random_range(-max_num..=max_num);
    let q = rng.random_range(1..=max_den);
    Rational::new(p, q).expect("nonzero denominator")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leaves {
    /// Only exact rational generator parameters and no constants.
    Exact,
    /// Exact and float parameters mixed, with occasional constants.
    Mixed,
}

fn param<R: Rng>(rng: &mut R, leaves: Leaves) -> Num {
    if leaves == Leaves::Exact || rng.random_bool(0.5) {
        Num::Exact(small_rational(rng, 6, 6))
    } else {
        Num::Float(rng.random_range(-3.0..3.0))
    }
}

pub fn leaf<R: Rng>(rng: &mut R, leaves: Leaves) -> WaveExpr {
    if leaves == Leaves::Mixed && rng.random_bool(0.15) {
        WaveExpr::Const {
            re: Num::Float(rng.random_range(-2.0..2.0)),
            im: Num::Float(rng.random_range(-2.0..2.0)),
        }
    } else {
        WaveExpr::Gen {
            spin: param(rng, leaves),
            rotation: param(rng, leaves),
        }
    }
}

/// A random tree of depth at most `max_depth` (drawn uniformly first).
pub fn tree<R: Rng>(rng: &mut R, max_depth: usize, leaves: Leaves) -> WaveExpr {
    let depth = rng.random_range(0..=max_depth);
    subtree(rng, depth, leaves)
}

fn subtree<R: Rng>(rng: &mut R, depth: usize, leaves: Leaves) -> WaveExpr {
    if depth == 0 {
        return leaf(rng, leaves);
    }
    match rng.random_range(0..20) {
        0..=3 => leaf(rng, leaves),
        4..=9 => wave::add(
            subtree(rng, depth - 1, leaves),
            subtree(rng, depth - 1, leaves),
        ),
        10..=16 => wave::mul(
            subtree(rng, depth - 1, leaves),
            subtree(rng, depth - 1, leaves),
        ),
        _ => wave::inv(subtree(rng, depth - 1, leaves)),
    }
}
