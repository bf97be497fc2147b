//! C ABI over `expwave`.
//!
//! Every fallible function returns an [`ExpwaveStatus`]; on failure the
//! message is available from [`expwave_last_error`] on the same thread.
//! Expressions are opaque handles released with [`expwave_expr_free`];
//! strings returned by the library are released with [`expwave_string_free`].
//! Wave rotations are in turns, term phases in radians.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use expwave::exactq::{self, PeriodError, PeriodStatus, Rational};
use expwave::expsum::{self, ExpSumError, ExpTerm, Method, Representation};
use expwave::lang::{parse_wave, print_wave};
use expwave::wave::{self, Num, WaveError, WaveExpr};
use expwave::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpwaveStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    /// A term or argument violates a precondition, e.g. a zero amplitude.
    InvalidInput = 4,
    Pole = 5,
    Overflow = 6,
    /// A computed period failed its numerical confirmation.
    VerificationFailed = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpwaveMethod {
    Prop1 = 1,
    Prop2 = 2,
    Prop3 = 3,
    Prop4 = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpwavePeriodStatus {
    Periodic = 0,
    Constant = 1,
    Unknown = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpwaveComplex {
    pub re: f64,
    pub im: f64,
}

/// A spin or rotation. When `exact` is set, `num / den` is the exact value
/// and `value` its nearest double.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpwaveNum {
    pub exact: bool,
    pub num: i64,
    pub den: i64,
    pub value: f64,
}

/// `amplitude · e^{i phase}`; `phase` is `σ` when `sigma_form` is set and
/// the total phase otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpwaveCanonical {
    pub amplitude: ExpwaveComplex,
    pub phase: f64,
    pub sigma_form: bool,
}

/// `period_num / period_den` is meaningful only for periodic results.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpwavePeriod {
    pub status: ExpwavePeriodStatus,
    pub period_num: i64,
    pub period_den: i64,
}

/// Opaque wave expression.
pub struct ExpwaveExpr(WaveExpr);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(ExpwaveStatus, String);

impl From<WaveError> for Failure {
    fn from(e: WaveError) -> Self {
        let status = match e {
            WaveError::PoleAt(_) => ExpwaveStatus::Pole,
            _ => ExpwaveStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

impl From<ExpSumError> for Failure {
    fn from(e: ExpSumError) -> Self {
        Failure(ExpwaveStatus::InvalidInput, e.to_string())
    }
}

impl From<PeriodError> for Failure {
    fn from(e: PeriodError) -> Self {
        let status = match e {
            PeriodError::Rational(_) => ExpwaveStatus::Overflow,
            PeriodError::VerificationFailed { .. } => ExpwaveStatus::VerificationFailed,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ExpwaveStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            ExpwaveStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            ExpwaveStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(ExpwaveStatus::NullPointer, "null pointer argument".into())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn write_expr(out: *mut *mut ExpwaveExpr, e: WaveExpr) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(Box::into_raw(Box::new(ExpwaveExpr(e))));
    Ok(())
}

fn complex(z: Complex64) -> ExpwaveComplex {
    ExpwaveComplex { re: z.re, im: z.im }
}

fn num(n: Num) -> ExpwaveNum {
    match n {
        Num::Exact(q) => ExpwaveNum {
            exact: true,
            num: q.num(),
            den: q.den(),
            value: q.to_f64(),
        },
        Num::Float(x) => ExpwaveNum {
            exact: false,
            num: 0,
            den: 1,
            value: x,
        },
    }
}

unsafe fn terms(r: *const f64, theta: *const f64, len: usize) -> Result<Vec<ExpTerm>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if r.is_null() || theta.is_null() {
        return Err(null());
    }
    let r = std::slice::from_raw_parts(r, len);
    let theta = std::slice::from_raw_parts(theta, len);
    r.iter()
        .zip(theta)
        .map(|(&r, &t)| ExpTerm::new(r, t).map_err(Failure::from))
        .collect()
}

/// Message for the last failure on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn expwave_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses `text` (NUL-terminated UTF-8) into a new expression.
#[no_mangle]
pub unsafe extern "C" fn expwave_expr_parse(
    text: *const c_char,
    out: *mut *mut ExpwaveExpr,
) -> ExpwaveStatus {
    guard(|| {
        if text.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure(ExpwaveStatus::InvalidUtf8, e.to_string()))?;
        let e = parse_wave(text).map_err(|e| Failure(ExpwaveStatus::ParseError, e.to_string()))?;
        write_expr(out, e)
    })
}

/// Releases an expression. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn expwave_expr_free(e: *mut ExpwaveExpr) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// The generator `w(spin, rotation)` with float parameters.
#[no_mangle]
pub unsafe extern "C" fn expwave_expr_gen(
    spin: f64,
    rotation: f64,
    out: *mut *mut ExpwaveExpr,
) -> ExpwaveStatus {
    guard(|| write_expr(out, wave::gen(spin, rotation)?))
}

/// Pointwise sum; the operands are copied and stay owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn expwave_expr_add(
    a: *const ExpwaveExpr,
    b: *const ExpwaveExpr,
    out: *mut *mut ExpwaveExpr,
) -> ExpwaveStatus {
    guard(|| write_expr(out, wave::add(deref(a)?.0.clone(), deref(b)?.0.clone())))
}

/// Pointwise product; the operands are copied and stay owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn expwave_expr_mul(
    a: *const ExpwaveExpr,
    b: *const ExpwaveExpr,
    out: *mut *mut ExpwaveExpr,
) -> ExpwaveStatus {
    guard(|| write_expr(out, wave::mul(deref(a)?.0.clone(), deref(b)?.0.clone())))
}

#[no_mangle]
pub unsafe extern "C" fn expwave_expr_inv(
    a: *const ExpwaveExpr,
    out: *mut *mut ExpwaveExpr,
) -> ExpwaveStatus {
    guard(|| write_expr(out, wave::inv(deref(a)?.0.clone())))
}

#[no_mangle]
pub unsafe extern "C" fn expwave_expr_eval(
    e: *const ExpwaveExpr,
    rho: f64,
    out: *mut ExpwaveComplex,
) -> ExpwaveStatus {
    guard(|| write(out, complex(wave::eval(&deref(e)?.0, rho)?)))
}

/// Value at `rho = 0`.
#[no_mangle]
pub unsafe extern "C" fn expwave_expr_project(
    e: *const ExpwaveExpr,
    out: *mut ExpwaveComplex,
) -> ExpwaveStatus {
    guard(|| write(out, complex(wave::project(&deref(e)?.0)?)))
}

#[no_mangle]
pub unsafe extern "C" fn expwave_expr_spin(
    e: *const ExpwaveExpr,
    out: *mut ExpwaveNum,
) -> ExpwaveStatus {
    guard(|| write(out, num(wave::spin_rotation(&deref(e)?.0).spin)))
}

#[no_mangle]
pub unsafe extern "C" fn expwave_expr_rotation(
    e: *const ExpwaveExpr,
    out: *mut ExpwaveNum,
) -> ExpwaveStatus {
    guard(|| write(out, num(wave::spin_rotation(&deref(e)?.0).rotation)))
}

/// Splits `e` into `amp · w(spin, rotation)`. `amp` receives a new expression.
#[no_mangle]
pub unsafe extern "C" fn expwave_expr_canonicalize(
    e: *const ExpwaveExpr,
    amp: *mut *mut ExpwaveExpr,
    spin: *mut ExpwaveNum,
    rotation: *mut ExpwaveNum,
) -> ExpwaveStatus {
    guard(|| {
        let c = wave::canonicalize(&deref(e)?.0);
        if amp.is_null() || spin.is_null() || rotation.is_null() {
            return Err(null());
        }
        write(spin, num(c.spin))?;
        write(rotation, num(c.rotation))?;
        write_expr(amp, c.amp)
    })
}

#[no_mangle]
pub unsafe extern "C" fn expwave_expr_period(
    e: *const ExpwaveExpr,
    out: *mut ExpwavePeriod,
) -> ExpwaveStatus {
    guard(|| {
        let report = exactq::periodicity(&deref(e)?.0)?;
        let period = report.period.unwrap_or(Rational::ZERO);
        let status = match report.status {
            PeriodStatus::Periodic => ExpwavePeriodStatus::Periodic,
            PeriodStatus::Constant => ExpwavePeriodStatus::Constant,
            PeriodStatus::Unknown => ExpwavePeriodStatus::Unknown,
        };
        write(
            out,
            ExpwavePeriod {
                status,
                period_num: period.num(),
                period_den: period.den(),
            },
        )
    })
}

/// Prints `e` in the expression grammar. Release with [`expwave_string_free`].
#[no_mangle]
pub unsafe extern "C" fn expwave_expr_print(
    e: *const ExpwaveExpr,
    out: *mut *mut c_char,
) -> ExpwaveStatus {
    guard(|| {
        let text = CString::new(print_wave(&deref(e)?.0)).expect("printed expressions are ASCII");
        write(out, text.into_raw())
    })
}

#[no_mangle]
pub unsafe extern "C" fn expwave_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `Σ r[k] e^{i theta[k]}` over `len` terms.
#[no_mangle]
pub unsafe extern "C" fn expwave_sum_direct(
    r: *const f64,
    theta: *const f64,
    len: usize,
    out: *mut ExpwaveComplex,
) -> ExpwaveStatus {
    guard(|| write(out, complex(expsum::sum_direct(&terms(r, theta, len)?))))
}

/// Canonical form of the `len` terms by `method`.
#[no_mangle]
pub unsafe extern "C" fn expwave_canon_terms(
    r: *const f64,
    theta: *const f64,
    len: usize,
    method: ExpwaveMethod,
    out: *mut ExpwaveCanonical,
) -> ExpwaveStatus {
    guard(|| {
        let terms = terms(r, theta, len)?;
        let method = match method {
            ExpwaveMethod::Prop1 => Method::Prop1,
            ExpwaveMethod::Prop2 => Method::Prop2,
            ExpwaveMethod::Prop3 => Method::Prop3,
            ExpwaveMethod::Prop4 => Method::Prop4,
        };
        let canonical = match method.canonicalize(&terms)? {
            Representation::Canonical(c) => ExpwaveCanonical {
                amplitude: complex(c.amplitude),
                phase: c.phase,
                sigma_form: false,
            },
            Representation::Sigma(s) => ExpwaveCanonical {
                amplitude: complex(s.amplitude),
                phase: s.sigma,
                sigma_form: true,
            },
        };
        write(out, canonical)
    })
}
