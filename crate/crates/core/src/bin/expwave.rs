use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use expwave::exactq;
use expwave::expsum::{self, Method, Representation};
use expwave::lang::{parse_terms, parse_wave, print_wave};
use expwave::tolerance;
use expwave::verify::{self, Suite, VerifyConfig};
use expwave::wave::{self, Num, WaveError, WaveExpr};

/// Canonical forms of exponential sums and the real wave number field.
///
/// Term files use radians for `theta`; wave expressions use turns.
#[derive(Parser)]
#[command(name = "expwave", version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for the verification trials and sample grids.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of verification trials.
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    /// Tolerance multiplier on the amplitude sum for the sum checks.
    #[arg(long, global = true, default_value_t = tolerance::ORACLE_ABS_SCALE)]
    tol: f64,
    /// Print compact single-line JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Leave elapsed time out of verification reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical form of a term list, e.g. {"terms":[{"r":1,"theta":0}]}.
    Canon {
        /// JSON file with the terms, or `-` for stdin.
        input: String,
        #[arg(long, short, default_value = "prop2")]
        method: MethodArg,
    },
    /// Run a verification suite.
    Verify {
        /// oracle, crossform, permutation, cyclic, branch, field, conservation or period.
        suite: String,
    },
    /// Operate on a wave expression such as `w(1,1/4)*w(2,1/4)`.
    Wave {
        /// Expression text (rotations in turns), or `-` for stdin.
        expr: String,
        action: WaveAction,
        /// Required for `eval`.
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
    },
    /// CSV samples `rho,re,im` of a wave expression over a uniform grid.
    Sample {
        /// Expression text, or `-` for stdin.
        expr: String,
        #[arg(allow_negative_numbers = true, default_value_t = 0.0)]
        rho_min: f64,
        #[arg(allow_negative_numbers = true, default_value_t = 1.0)]
        rho_max: f64,
        #[arg(default_value_t = 11)]
        count: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Prop1,
    Prop2,
    Prop3,
    Prop4,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Prop1 => Method::Prop1,
            MethodArg::Prop2 => Method::Prop2,
            MethodArg::Prop3 => Method::Prop3,
            MethodArg::Prop4 => Method::Prop4,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WaveAction {
    Eval,
    Canon,
    Spin,
    Project,
    Period,
}

enum Failure {
    /// Exit 1.
    Math(String),
    /// Exit 2.
    Input(String),
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Canon { ref input, method } => canon(&cli.global, input, method.into()),
        Command::Verify { ref suite } => run_verify(&cli.global, suite),
        Command::Wave {
            ref expr,
            action,
            rho,
        } => wave_cmd(&cli.global, expr, action, rho),
        Command::Sample {
            ref expr,
            rho_min,
            rho_max,
            count,
        } => sample(expr, rho_min, rho_max, count),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_input(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Input(format!("{arg}: {e}")))
    }
}

fn expr_text(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        read_input(arg)
    } else {
        Ok(arg.to_owned())
    }
}

fn parse_expr(arg: &str) -> Result<WaveExpr, Failure> {
    let text = expr_text(arg)?;
    parse_wave(&text).map_err(|e| {
        let caret = format!(
            "{}{}",
            " ".repeat(e.span.start),
            "^".repeat((e.span.end - e.span.start).max(1))
        );
        Failure::Input(format!("{e}\n  {}\n  {caret}", text.trim_end()))
    })
}

fn emit(global: &Global, v: &Value) {
    let text = if global.json {
        v.to_string()
    } else {
        serde_json::to_string_pretty(v).expect("values serialize")
    };
    println!("{text}");
}

fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn num(n: Num) -> Value {
    match n {
        Num::Exact(q) => json!(q.to_string()),
        Num::Float(x) => json!(x),
    }
}

fn canon(global: &Global, input: &str, method: Method) -> Outcome {
    let terms = parse_terms(&read_input(input)?).map_err(|e| Failure::Input(e.to_string()))?;
    let rep = method
        .canonicalize(&terms)
        .map_err(|e| Failure::Input(format!("{method}: {e}")))?;
    let direct = expsum::sum_direct(&terms);
    let reconstructed = rep.reconstruct();
    let mut out = json!({"method": method.name(), "A": complex(rep.amplitude())});
    match rep {
        Representation::Canonical(c) => out["phi"] = json!(c.phase),
        Representation::Sigma(s) => out["sigma"] = json!(s.sigma),
    }
    out["reconstructed"] = complex(reconstructed);
    out["direct"] = complex(direct);
    out["abs_err"] = json!((reconstructed - direct).norm());
    emit(global, &out);
    Ok(())
}

fn run_verify(global: &Global, suite: &str) -> Outcome {
    let suite: Suite = suite
        .parse()
        .map_err(|e: verify::ConfigError| Failure::Input(e.to_string()))?;
    let config = VerifyConfig {
        seed: global.seed,
        trials: global.trials,
        tol_abs_scale: global.tol,
        ..VerifyConfig::default()
    };
    let report = verify::run(suite, &config, !global.no_timestamp)
        .map_err(|e| Failure::Input(e.to_string()))?;
    if global.json {
        println!(
            "{}",
            serde_json::to_string(&report).expect("reports serialize")
        );
    } else {
        let mut out = io::stdout().lock();
        let _ = writeln!(
            out,
            "suite {} seed {} trials {}",
            report.suite, config.seed, config.trials
        );
        for c in &report.checks {
            let _ = writeln!(
                out,
                "  {:<4} {:<32} passed {:>7} failed {:>5} excluded {:>6} worst {} (tol {:e})",
                if c.ok { "ok" } else { "FAIL" },
                c.name,
                c.passed,
                c.failed,
                c.excluded,
                c.max_error.map_or("-".to_owned(), |e| format!("{e:.3e}")),
                c.tolerance,
            );
        }
        for (k, v) in &report.notes {
            let _ = writeln!(out, "  note {k}: {v}");
        }
        if let Some(ms) = report.elapsed_ms {
            let _ = writeln!(out, "  elapsed {ms} ms");
        }
    }
    if report.passed {
        Ok(())
    } else {
        let failing: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| c.name)
            .collect();
        Err(Failure::Math(format!(
            "suite {suite} failed: {}",
            failing.join(", ")
        )))
    }
}

fn pole(e: WaveError) -> Failure {
    Failure::Math(e.to_string())
}

fn wave_cmd(global: &Global, arg: &str, action: WaveAction, rho: Option<f64>) -> Outcome {
    let expr = parse_expr(arg)?;
    let out = match action {
        WaveAction::Eval => {
            let rho = rho.ok_or_else(|| Failure::Input("eval needs --rho".into()))?;
            let v = wave::eval(&expr, rho).map_err(pole)?;
            json!({"rho": rho, "re": v.re, "im": v.im})
        }
        WaveAction::Project => complex(wave::project(&expr).map_err(pole)?),
        WaveAction::Spin => {
            let sr = wave::spin_rotation(&expr);
            json!({"spin": num(sr.spin), "rotation": num(sr.rotation)})
        }
        WaveAction::Canon => {
            let c = wave::canonicalize(&expr);
            let mut worst = 0.0_f64;
            for rho in wave::sample_grid(global.seed) {
                let (Ok(s), Ok(r)) = (wave::eval_conditioned(&expr, rho), c.reconstruct(rho))
                else {
                    continue;
                };
                worst = worst.max((r - s.value).norm() / s.scale.max(f64::MIN_POSITIVE));
            }
            if worst > tolerance::FIELD_RELATIVE {
                return Err(Failure::Math(format!(
                    "canonical form does not reconstruct the expression (relative error {worst:e})"
                )));
            }
            json!({"amp": print_wave(&c.amp), "f": num(c.spin), "theta": num(c.rotation)})
        }
        WaveAction::Period => {
            let report = exactq::periodicity(&expr).map_err(|e| Failure::Math(e.to_string()))?;
            serde_json::to_value(report).expect("reports serialize")
        }
    };
    emit(global, &out);
    Ok(())
}

fn sample(arg: &str, rho_min: f64, rho_max: f64, count: usize) -> Outcome {
    if count < 2 {
        return Err(Failure::Input(format!(
            "count must be at least 2, got {count}"
        )));
    }
    if !(rho_min.is_finite() && rho_max.is_finite() && rho_min < rho_max) {
        return Err(Failure::Input(format!(
            "need rho_min < rho_max, got {rho_min} and {rho_max}"
        )));
    }
    let expr = parse_expr(arg)?;
    let step = (rho_max - rho_min) / (count - 1) as f64;
    let mut out = io::BufWriter::new(io::stdout().lock());
    let mut rows = String::from("rho,re,im\n");
    for i in 0..count {
        let rho = if i + 1 == count {
            rho_max
        } else {
            rho_min + i as f64 * step
        };
        match wave::eval(&expr, rho) {
            Ok(v) => rows.push_str(&format!("{rho},{},{}\n", v.re, v.im)),
            Err(_) => rows.push_str(&format!("{rho},,,#pole\n")),
        }
    }
    out.write_all(rows.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Input(format!("writing output: {e}")))
}
