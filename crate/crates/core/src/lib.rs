//! Canonical forms for finite sums of complex exponentials, and the algebra of
//! real wave numbers in which their total phase is a conserved quantity.
//!
//! * [`expsum`]: the four canonical constructions and the direct-sum oracle
//! * [`wave`]: generators `w(f, θ)`, pointwise ⊗/⊕/inverse, spin and rotation
//! * [`exactq`]: exact rationals and periodicity of rational-spin expressions
//! * [`lang`]: the wave-expression grammar and the JSON term schema
//! * [`verify`]: the seeded verification suites behind `expwave verify`

pub mod exactq;
pub mod expsum;
pub mod lang;
pub mod tolerance;
pub mod verify;
pub mod wave;

pub use num_complex::Complex64;
