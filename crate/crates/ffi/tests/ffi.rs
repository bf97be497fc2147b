use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use expwave_ffi::*;

fn parse(text: &str) -> *mut ExpwaveExpr {
    let c = CString::new(text).unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(
        unsafe { expwave_expr_parse(c.as_ptr(), &mut e) },
        ExpwaveStatus::Ok
    );
    assert!(!e.is_null());
    e
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(expwave_last_error()) }
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn parse_print_free() {
    let e = parse("w(1,1/4) * w(2, 1/4)");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { expwave_expr_print(e, &mut s) }, ExpwaveStatus::Ok);
    assert_eq!(
        unsafe { CStr::from_ptr(s) }.to_str().unwrap(),
        "w(1,1/4)*w(2,1/4)"
    );
    unsafe {
        expwave_string_free(s);
        expwave_expr_free(e);
        expwave_expr_free(ptr::null_mut());
        expwave_string_free(ptr::null_mut());
    }
}

#[test]
fn parse_error_sets_message() {
    let c = CString::new("w(1,0").unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(
        unsafe { expwave_expr_parse(c.as_ptr(), &mut e) },
        ExpwaveStatus::ParseError
    );
    assert!(e.is_null());
    assert!(last_error().contains("offset 5"), "{}", last_error());

    let bad = [b'w', 0xff, 0];
    assert_eq!(
        unsafe { expwave_expr_parse(bad.as_ptr().cast(), &mut e) },
        ExpwaveStatus::InvalidUtf8
    );
    assert_eq!(
        unsafe { expwave_expr_parse(ptr::null(), &mut e) },
        ExpwaveStatus::NullPointer
    );
    let ok = CString::new("w(1,0)").unwrap();
    assert_eq!(
        unsafe { expwave_expr_parse(ok.as_ptr(), ptr::null_mut()) },
        ExpwaveStatus::NullPointer
    );
    assert_eq!(last_error(), "null pointer argument");
}

#[test]
fn eval_project_and_pole() {
    let e = parse("w(5,1/4)");
    let mut z = ExpwaveComplex {
        re: f64::NAN,
        im: f64::NAN,
    };
    assert_eq!(
        unsafe { expwave_expr_project(e, &mut z) },
        ExpwaveStatus::Ok
    );
    assert_eq!(z, ExpwaveComplex { re: 0.0, im: 1.0 });
    assert_eq!(last_error(), "");
    assert_eq!(
        unsafe { expwave_expr_eval(e, 0.05, &mut z) },
        ExpwaveStatus::Ok
    );
    assert_eq!(z, ExpwaveComplex { re: -1.0, im: 0.0 });
    unsafe { expwave_expr_free(e) };

    let p = parse("inv(w(0,0)+w(0,1/2))");
    assert_eq!(
        unsafe { expwave_expr_eval(p, 0.3, &mut z) },
        ExpwaveStatus::Pole
    );
    assert!(last_error().contains("pole"));
    unsafe { expwave_expr_free(p) };
}

#[test]
fn spin_rotation_and_canonical() {
    let e = parse("w(1,1/4)*w(2,1/4)");
    let mut spin = ExpwaveNum {
        exact: false,
        num: 0,
        den: 0,
        value: 0.0,
    };
    let mut rotation = spin;
    assert_eq!(
        unsafe { expwave_expr_spin(e, &mut spin) },
        ExpwaveStatus::Ok
    );
    assert_eq!(
        unsafe { expwave_expr_rotation(e, &mut rotation) },
        ExpwaveStatus::Ok
    );
    assert_eq!(
        (spin.exact, spin.num, spin.den, spin.value),
        (true, 3, 1, 3.0)
    );
    assert_eq!((rotation.num, rotation.den), (1, 2));

    let mut amp = ptr::null_mut();
    assert_eq!(
        unsafe { expwave_expr_canonicalize(e, &mut amp, &mut spin, &mut rotation) },
        ExpwaveStatus::Ok
    );
    let mut z = ExpwaveComplex { re: 0.0, im: 0.0 };
    assert_eq!(
        unsafe { expwave_expr_project(amp, &mut z) },
        ExpwaveStatus::Ok
    );
    assert_eq!(z, ExpwaveComplex { re: 1.0, im: 0.0 });
    unsafe {
        expwave_expr_free(amp);
        expwave_expr_free(e);
    }

    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { expwave_expr_gen(0.5, 0.0, &mut g) },
        ExpwaveStatus::Ok
    );
    assert_eq!(
        unsafe { expwave_expr_spin(g, &mut spin) },
        ExpwaveStatus::Ok
    );
    assert!(!spin.exact && spin.value == 0.5);
    assert_eq!(
        unsafe { expwave_expr_gen(f64::NAN, 0.0, &mut g) },
        ExpwaveStatus::InvalidInput
    );
}

#[test]
fn combinators_copy_operands() {
    let a = parse("w(2/3,0)");
    let b = parse("w(1/2,0)");
    let mut sum = ptr::null_mut();
    let mut prod = ptr::null_mut();
    let mut inv = ptr::null_mut();
    unsafe {
        assert_eq!(expwave_expr_add(a, b, &mut sum), ExpwaveStatus::Ok);
        assert_eq!(expwave_expr_mul(a, b, &mut prod), ExpwaveStatus::Ok);
        assert_eq!(expwave_expr_inv(prod, &mut inv), ExpwaveStatus::Ok);
        expwave_expr_free(a);
        expwave_expr_free(b);
    }
    let mut period = ExpwavePeriod {
        status: ExpwavePeriodStatus::Unknown,
        period_num: 0,
        period_den: 0,
    };
    assert_eq!(
        unsafe { expwave_expr_period(sum, &mut period) },
        ExpwaveStatus::Ok
    );
    assert_eq!(period.status, ExpwavePeriodStatus::Periodic);
    assert_eq!((period.period_num, period.period_den), (6, 1));

    let mut spin = ExpwaveNum {
        exact: false,
        num: 0,
        den: 0,
        value: 0.0,
    };
    assert_eq!(
        unsafe { expwave_expr_spin(inv, &mut spin) },
        ExpwaveStatus::Ok
    );
    assert_eq!((spin.num, spin.den), (-7, 6));
    unsafe {
        expwave_expr_free(sum);
        expwave_expr_free(prod);
        expwave_expr_free(inv);
    }

    let c = parse("const(2,0)");
    assert_eq!(
        unsafe { expwave_expr_period(c, &mut period) },
        ExpwaveStatus::Ok
    );
    assert_eq!(period.status, ExpwavePeriodStatus::Constant);
    unsafe { expwave_expr_free(c) };
    assert_eq!(
        unsafe { expwave_expr_add(ptr::null(), ptr::null(), &mut sum) },
        ExpwaveStatus::NullPointer
    );
}

#[test]
fn canonical_forms_of_terms() {
    let r = [1.0, 1.0];
    let theta = [0.0, std::f64::consts::FRAC_PI_2];
    let mut direct = ExpwaveComplex { re: 0.0, im: 0.0 };
    assert_eq!(
        unsafe { expwave_sum_direct(r.as_ptr(), theta.as_ptr(), 2, &mut direct) },
        ExpwaveStatus::Ok
    );
    assert!((direct.re - 1.0).abs() < 1e-15 && (direct.im - 1.0).abs() < 1e-15);

    for method in [
        ExpwaveMethod::Prop1,
        ExpwaveMethod::Prop2,
        ExpwaveMethod::Prop3,
    ] {
        let mut out = ExpwaveCanonical {
            amplitude: direct,
            phase: 0.0,
            sigma_form: true,
        };
        assert_eq!(
            unsafe { expwave_canon_terms(r.as_ptr(), theta.as_ptr(), 2, method, &mut out) },
            ExpwaveStatus::Ok
        );
        assert!(!out.sigma_form);
        assert!((out.amplitude.re - 1.0).abs() < 1e-12 && (out.amplitude.im + 1.0).abs() < 1e-12);
        assert_eq!(out.phase, std::f64::consts::FRAC_PI_2);
    }

    let mut out = ExpwaveCanonical {
        amplitude: direct,
        phase: 0.0,
        sigma_form: false,
    };
    let (r1, t1) = ([5.0], [0.3]);
    assert_eq!(
        unsafe { expwave_canon_terms(r1.as_ptr(), t1.as_ptr(), 1, ExpwaveMethod::Prop4, &mut out) },
        ExpwaveStatus::Ok
    );
    assert_eq!(
        out,
        ExpwaveCanonical {
            amplitude: ExpwaveComplex { re: 5.0, im: 0.0 },
            phase: 0.3,
            sigma_form: true
        }
    );

    let zero = [0.0];
    assert_eq!(
        unsafe {
            expwave_canon_terms(
                zero.as_ptr(),
                t1.as_ptr(),
                1,
                ExpwaveMethod::Prop1,
                &mut out,
            )
        },
        ExpwaveStatus::InvalidInput
    );
    assert!(last_error().contains("R₀ₖ > 0"), "{}", last_error());
    assert_eq!(
        unsafe { expwave_canon_terms(ptr::null(), ptr::null(), 0, ExpwaveMethod::Prop2, &mut out) },
        ExpwaveStatus::Ok
    );
    assert_eq!(
        unsafe { expwave_canon_terms(ptr::null(), t1.as_ptr(), 1, ExpwaveMethod::Prop2, &mut out) },
        ExpwaveStatus::NullPointer
    );
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/expwave.h");
    for name in [
        "expwave_last_error",
        "expwave_expr_parse",
        "expwave_expr_free",
        "expwave_expr_eval",
        "expwave_expr_project",
        "expwave_expr_spin",
        "expwave_expr_canonicalize",
        "expwave_expr_period",
        "expwave_expr_print",
        "expwave_string_free",
        "expwave_canon_terms",
        "EXPWAVE_STATUS_POLE = 5",
        "typedef struct ExpwaveExpr ExpwaveExpr;",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "expwave.h"

int main(void) {
    ExpwaveExpr *e = NULL;
    if (expwave_expr_parse("w(2/3,0)+w(1/2,0)", &e) != EXPWAVE_STATUS_OK) return 10;
    ExpwavePeriod p;
    if (expwave_expr_period(e, &p) != EXPWAVE_STATUS_OK) return 11;
    if (p.status != EXPWAVE_PERIOD_STATUS_PERIODIC || p.period_num != 6 || p.period_den != 1) return 12;
    char *s = NULL;
    if (expwave_expr_print(e, &s) != EXPWAVE_STATUS_OK) return 13;
    printf("%s\n", s);
    expwave_string_free(s);
    expwave_expr_free(e);

    ExpwaveExpr *bad = NULL;
    if (expwave_expr_parse("w(1,", &bad) != EXPWAVE_STATUS_PARSE_ERROR || bad != NULL) return 14;
    if (strlen(expwave_last_error()) == 0) return 15;

    double r[2] = {1.0, 1.0}, theta[2] = {0.0, 1.5707963267948966};
    ExpwaveCanonical c;
    if (expwave_canon_terms(r, theta, 2, EXPWAVE_METHOD_PROP3, &c) != EXPWAVE_STATUS_OK) return 16;
    printf("%.6f %.6f %.6f\n", c.amplitude.re, c.amplitude.im, c.phase);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_staticlib() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = target_dir();
    let lib = [
        dir.join("libexpwave_ffi.a"),
        dir.join("deps/libexpwave_ffi.a"),
    ]
    .into_iter()
    .find(|p| p.exists())
    .expect("staticlib is built alongside the tests");
    let work = dir.join(format!("ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    let bin = work.join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    std::fs::remove_dir_all(&work).unwrap();
    assert!(out.status.success(), "C program exited with {}", out.status);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "w(2/3,0)+w(1/2,0)\n1.000000 -1.000000 1.570796\n"
    );
}

fn which_cc() -> Result<String, ()> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match Command::new(&cc).arg("--version").output() {
        Ok(o) if o.status.success() => Ok(cc),
        _ => Err(()),
    }
}
