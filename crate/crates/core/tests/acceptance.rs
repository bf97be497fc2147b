//! Acceptance criteria, one line per criterion. Run with
//! `cargo test -p expwave --test acceptance`.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use expwave::exactq::{self, PeriodStatus, Rational};
use expwave::expsum;
use expwave::lang::{parse_wave, print_wave};
use expwave::verify::{self, draw, Requirement, Suite, VerifyConfig, VerifyReport};
use expwave::wave::{self, Num, WaveExpr};
use expwave::Complex64;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn run_suite(suite: Suite, seed: u64, trials: usize) -> VerifyReport {
    let config = VerifyConfig {
        seed,
        trials,
        ..VerifyConfig::default()
    };
    verify::run(suite, &config, true).expect("valid config")
}

/// Requires the named checks to be present, observed and passing.
fn checks_ok(report: &VerifyReport, names: &[&str]) -> Outcome {
    let mut summary = Vec::new();
    for name in names {
        let c = report
            .check(name)
            .ok_or_else(|| format!("{}: no check `{name}`", report.suite))?;
        if !c.ok || c.passed == 0 {
            return Err(format!(
                "{name}: passed {} failed {} worst {:?} (tol {:e})",
                c.passed, c.failed, c.max_error, c.tolerance
            ));
        }
        let stat = if c.requirement == Requirement::AllExceed {
            "min"
        } else {
            "max"
        };
        summary.push(format!("{name} {stat} {:.1e}", c.max_error.unwrap_or(0.0)));
    }
    Ok(summary.join(", "))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let report = run_suite(Suite::Oracle, 42, 10_000);
    let elapsed = start.elapsed();
    let detail = checks_ok(&report, &["prop1", "prop2", "prop3", "prop4"])?;
    if elapsed > Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{detail}; {} ms", elapsed.as_millis()))
}

fn cross_form() -> Outcome {
    let report = run_suite(Suite::Crossform, 2, 5_000);
    let detail = checks_ok(
        &report,
        &[
            "prop1_vs_prop2",
            "prop3_vs_prop2",
            "prop3_vs_prop1",
            "uncorrected_prop3_rejected",
        ],
    )?;
    let excluded = report.check("prop1_vs_prop2").map_or(0, |c| c.excluded);
    Ok(format!("{detail}; near-cancellation excluded {excluded}"))
}

fn two_term_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..1_000 {
        let a = rng.random_range(-10.0 * PI..=10.0 * PI);
        let b = rng.random_range(-10.0 * PI..=10.0 * PI);
        let direct = Complex64::new(a.cos() + b.cos(), a.sin() + b.sin());
        let err = (expsum::two_term_sum(a, b).reconstruct() - direct).norm();
        worst = worst.max(err);
    }
    if worst <= 1e-13 {
        Ok(format!("max {worst:.1e}"))
    } else {
        Err(format!("max {worst:e}"))
    }
}

fn permutation_invariance() -> Outcome {
    let report = run_suite(Suite::Permutation, 4, 2_000);
    checks_ok(
        &report,
        &[
            "prop1_amplitude",
            "prop2_value",
            "prop3_amplitude",
            "prop4_value",
            "prop4_sigma_order_dependent",
        ],
    )
}

fn cyclic_product() -> Outcome {
    let report = run_suite(Suite::Cyclic, 7, 2_000);
    let detail = checks_ok(&report, &["product_equals_power", "root_of_unity"])?;
    let checked = report.check("root_of_unity").map_or(0, |c| c.passed);
    let logged: u64 = report
        .notes
        .iter()
        .filter(|(k, _)| k.starts_with("root_index_"))
        .map(|(_, v)| v)
        .sum();
    if logged != checked {
        return Err(format!("{logged} root indices logged for {checked} trials"));
    }
    Ok(format!(
        "{detail}; {} distinct root indices",
        report.notes.len()
    ))
}

fn branch_robustness() -> Outcome {
    let report = run_suite(Suite::Branch, 6, 1_000);
    checks_ok(&report, &["prop3_step", "prop4_step"])
}

const FIELD_LAWS: [&str; 9] = [
    "add_commutative",
    "mul_commutative",
    "add_associative",
    "mul_associative",
    "distributive",
    "mul_identity",
    "add_inverse",
    "mul_inverse",
    "conjugation",
];

fn field_axioms(report: &VerifyReport) -> Outcome {
    let detail = checks_ok(report, &FIELD_LAWS)?;
    let poles: u64 = FIELD_LAWS
        .iter()
        .filter_map(|n| report.check(n))
        .map(|c| c.excluded)
        .sum();
    let points = report
        .check("mul_identity")
        .map_or(0, |c| c.passed + c.excluded);
    if points != 64 * report.config.trials as u64 {
        return Err(format!(
            "{points} sample points for {} trees",
            report.config.trials
        ));
    }
    Ok(format!("{detail}; poles excluded {poles}"))
}

fn conservation() -> Outcome {
    let report = run_suite(Suite::Conservation, 8, 5_000);
    checks_ok(
        &report,
        &[
            "mul_conserves",
            "add_conserves",
            "inv_negates",
            "exact_stays_exact",
        ],
    )
}

fn canonicalization(report: &VerifyReport) -> Outcome {
    checks_ok(report, &["canonical_reconstruction"])
}

fn brute_force_lcm(a: (i64, i64), b: (i64, i64)) -> Rational {
    // Smallest positive T = k·a that is also a multiple of b.
    let (p1, q1) = a;
    let (p2, q2) = b;
    let mut k = 1;
    while (k * p1 * q2) % (q1 * p2) != 0 {
        k += 1;
    }
    Rational::new(k * p1, q1).unwrap()
}

fn periodicity() -> Outcome {
    let expr = parse_wave("w(2/3,0)+w(1/2,0)").map_err(|e| e.to_string())?;
    let report = exactq::periodicity(&expr).map_err(|e| e.to_string())?;
    if report.status != PeriodStatus::Periodic || report.period != Some(Rational::integer(6)) {
        return Err(format!("reported {report:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for _ in 0..64 {
        let rho = rng.random_range(-20.0..20.0);
        let a = wave::eval(&expr, rho).map_err(|e| e.to_string())?;
        let b = wave::eval(&expr, rho + 6.0).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).norm() / a.norm().max(1.0));
    }
    if worst > 1e-9 {
        return Err(format!("eval(rho + 6) differs by {worst:e}"));
    }

    for src in ["w(0,1/3)", "const(2,1)", "w(0,0)*w(0,1/4)"] {
        let r = exactq::periodicity(&parse_wave(src).unwrap()).map_err(|e| e.to_string())?;
        if r.status != PeriodStatus::Constant {
            return Err(format!("{src}: {r:?}"));
        }
    }
    let sqrt2 = format!("w(1,0)+w({:?},0)", 2f64.sqrt());
    for src in [sqrt2.as_str(), "w(1.5,0)", "w(1/2,0)*w(0.25,0)"] {
        let r = exactq::periodicity(&parse_wave(src).unwrap()).map_err(|e| e.to_string())?;
        if r.status != PeriodStatus::Unknown {
            return Err(format!("{src}: {r:?}"));
        }
    }

    let mut pairs = 0;
    for p1 in 1..=12 {
        for q1 in 1..=12 {
            for p2 in 1..=12 {
                for q2 in 1..=12 {
                    let a = Rational::new(p1, q1).unwrap();
                    let b = Rational::new(p2, q2).unwrap();
                    let expected = brute_force_lcm((a.num(), a.den()), (b.num(), b.den()));
                    let got = exactq::rat_lcm(a, b).map_err(|e| e.to_string())?;
                    if got != expected {
                        return Err(format!("rat_lcm({a}, {b}) = {got}, brute force {expected}"));
                    }
                    pairs += 1;
                }
            }
        }
    }

    let suite = run_suite(Suite::Period, 10, 1_000);
    let detail = checks_ok(
        &suite,
        &[
            "period_holds",
            "period_minimal",
            "constant_detected",
            "float_spin_unknown",
        ],
    )?;
    Ok(format!(
        "period 6 max {worst:.1e}; {pairs} lcm pairs; {detail}"
    ))
}

fn projection() -> Outcome {
    for theta in [
        Num::from(0),
        Rational::new(1, 4).unwrap().into(),
        Num::Float(0.37),
        Num::Float(-2.5),
    ] {
        let spins = [Num::from(0), Num::from(1), Num::from(2), Num::Float(PI)];
        let values: Vec<Complex64> = spins
            .iter()
            .map(|&f| {
                wave::project(&WaveExpr::Gen {
                    spin: f,
                    rotation: theta,
                })
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if values.iter().any(|v| {
            v.re.to_bits() != values[0].re.to_bits() || v.im.to_bits() != values[0].im.to_bits()
        }) {
            return Err(format!("theta {theta:?}: {values:?}"));
        }
    }
    let report = run_suite(Suite::Conservation, 11, 1_000);
    checks_ok(&report, &["lift_projection", "projection_drops_spin"])
}

fn parser() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..500 {
        let tree = draw::tree(&mut rng, 6, draw::Leaves::Mixed);
        let text = print_wave(&tree);
        let back = parse_wave(&text).map_err(|e| format!("tree {i}: {text}: {e}"))?;
        if back != tree {
            return Err(format!("tree {i} changed: {text}"));
        }
    }

    let fixtures = include_str!("fixtures/malformed_waves.txt");
    let mut count = 0;
    for src in fixtures.lines().chain([""]) {
        let err = match parse_wave(src) {
            Ok(e) => return Err(format!("{src:?} parsed as {e}")),
            Err(err) => err,
        };
        if err.span.start > err.span.end || err.span.end > src.len() || err.expected.is_empty() {
            return Err(format!(
                "{src:?}: span {:?}, expected {:?}",
                err.span, err.expected
            ));
        }
        count += 1;
    }

    let bin = env!("CARGO_BIN_EXE_expwave");
    let cases: [(&[&str], i32); 8] = [
        (&["wave", "w(1,1/4)*w(2,1/4)", "canon"], 0),
        (&["wave", "w(1,0", "spin"], 2),
        (&["wave", "inv(w(0,0)+w(0,1/2))", "eval", "--rho", "0.5"], 1),
        (&["verify", "nosuch"], 2),
        (&["verify", "period", "--trials", "20"], 0),
        (&["verify", "oracle", "--trials", "20", "--tol", "1e-30"], 1),
        (&["sample", "w(1,0)", "1", "0", "5"], 2),
        (&["frobnicate"], 2),
    ];
    for (args, code) in cases {
        let status = Command::new(bin)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        if status.code() != Some(code) {
            return Err(format!("{args:?} exited with {status}, expected {code}"));
        }
    }
    Ok(format!(
        "500 round trips, {count} malformed inputs, {} exit codes",
        cases.len()
    ))
}

fn main() {
    let field = run_suite(Suite::Field, 9, 1_000);
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("cross-form agreement", Box::new(cross_form)),
        ("two-term identity", Box::new(two_term_identity)),
        ("permutation invariance", Box::new(permutation_invariance)),
        ("cyclic product", Box::new(cyclic_product)),
        ("branch robustness", Box::new(branch_robustness)),
        ("wave field axioms", Box::new(|| field_axioms(&field))),
        ("conservation", Box::new(conservation)),
        ("canonicalization", Box::new(|| canonicalization(&field))),
        ("periodicity", Box::new(periodicity)),
        ("projection", Box::new(projection)),
        ("parser and CLI", Box::new(parser)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
