//! Thresholds shared by the library, the verification harness and the tests.
//!
//! Absolute tolerances on exponential sums are multipliers on `Σ r_j`, not on
//! `|S_n|`: a sum may legitimately cancel to zero, so the conditioning of the
//! summation problem is set by the total amplitude.

/// Canonical form vs. direct summation, and cross-form agreement of `A_n`.
pub const ORACLE_ABS_SCALE: f64 = 1e-10;

/// Below `CANCELLATION * Σ_{j<n} r_j` the nested-cosine recursions stop taking
/// the logarithm of the running amplitude and use the log-free update instead.
pub const CANCELLATION: f64 = 1e-12;

/// Sums with `|S_n| < NEAR_CANCELLATION * Σ r_j` are excluded from the cyclic
/// product identity and from cross-form comparisons.
pub const NEAR_CANCELLATION: f64 = 1e-6;

/// Relative error allowed between the product of cyclic shifts and `S_n^n`.
pub const CYCLIC_RELATIVE: f64 = 1e-9;

/// Relative change allowed in a nested-cosine step when the log branch moves.
pub const BRANCH_RELATIVE: f64 = 1e-12;

/// Absolute error of the closed two-term identity.
pub const TWO_TERM_ABS: f64 = 1e-13;

/// Pointwise field laws and canonical reconstruction, relative to the
/// propagated error scale of the expressions being compared.
pub const FIELD_RELATIVE: f64 = 1e-10;

/// Conservation of float-tagged spin and rotation.
pub const CONSERVATION_FLOAT: f64 = 1e-12;

/// Numeric confirmation of a reported period.
pub const PERIOD_RELATIVE: f64 = 1e-9;

/// Projection of a lifted sum vs. direct summation, as a multiple of `Σ r_j`.
pub const PROJECTION_ABS_SCALE: f64 = 1e-12;

/// Inverting a value whose error scale exceeds its magnitude by this factor is
/// treated as hitting a pole.
pub const POLE_CONDITION: f64 = 1e8;
