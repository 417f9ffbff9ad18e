//! `probcirc`: batch front end for compiling probabilistic programs to
//! circuits, exact inference, equivalence checking, normal forms,
//! conditioning elimination, the axiom soundness suite and derivation
//! checking.
//!
//! Reports are JSON on standard output unless `--human` is given.  Exit
//! codes: 0 success (or equivalent), 1 inequivalent / check failed,
//! 2 input, parse or typing error, 3 evaluation cap exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use probcirc::axioms::{check_all, check_derivation, Derivation, SoundnessReport};
use probcirc::circuit::{parse_circuit, serialize};
use probcirc::normalform::{eliminate_conditioning_with, equiv_report, normal_form_with};
use probcirc::semantics::{eval_with, Limits, ProjClass, DEFAULT_MAX_CELLS};
use probcirc::surface::{infer_json, parse_program, translate};
use probcirc::{Circuit, Error};

#[derive(Parser, Debug)]
#[command(name = "probcirc", version, about = "Exact equivalence checking and inference via probabilistic circuits")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Global {
    /// Emit JSON (the default).
    #[arg(long, global = true, conflicts_with = "human")]
    json: bool,
    /// Emit human-readable text instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    /// Maximum number of matrix cells (and live states) during evaluation.
    #[arg(long, global = true, value_name = "CELLS", default_value_t = DEFAULT_MAX_CELLS)]
    cap: u128,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Translate a program to circuit text and report its type.
    Compile { file: PathBuf },
    /// Exact inference: the canonical class of a program or circuit.
    Infer { file: PathBuf },
    /// Decide equivalence of two programs or circuits (exit 0 iff equivalent).
    Equiv { a: PathBuf, b: PathBuf },
    /// Emit the normal form of a causal program or circuit.
    Normalize { file: PathBuf },
    /// Emit a representative without conditioning (or the failure circuit).
    Eliminate { file: PathBuf },
    /// Run the soundness suite over every axiom and lemma.
    AxiomsCheck {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Replay a derivation file step by step.
    DeriveCheck { file: PathBuf },
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::CapExceeded { .. } => 3,
            Error::Syntax { .. }
            | Error::TypeMismatch { .. }
            | Error::BadProbability(_)
            | Error::UnboundVariable(_)
            | Error::Arity(_)
            | Error::SurfaceType(_)
            | Error::Json(_)
            | Error::Incomparable(..) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// What a command produced: the report and the exit status.
struct Outcome {
    code: u8,
    json: Value,
    human: String,
}

fn ok(json: Value, human: String) -> Outcome {
    Outcome { code: 0, json, human }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

/// Reads a file holding either circuit text or a surface program.  The
/// circuit grammar is tried first; if that fails the program grammar is
/// used, and if both fail the program error is reported.
fn load(path: &Path) -> Result<Circuit, Failure> {
    let text = read(path)?;
    if let Ok(c) = parse_circuit(&text) {
        return Ok(c);
    }
    let program = parse_program(&text).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })?;
    translate(&program).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn class_human(class: &ProjClass) -> String {
    let v = infer_json(class);
    match v.get("dist").and_then(Value::as_object) {
        None => "bottom (every run fails)".to_string(),
        Some(dist) => dist
            .iter()
            .map(|(k, w)| format!("  {k}: {}", rat_text(w)))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn rat_text(v: &Value) -> String {
    match v.as_array().map(Vec::as_slice) {
        Some([n, d]) if d == &json!(1) => n.to_string(),
        Some([n, d]) => format!("{n}/{d}"),
        _ => v.to_string(),
    }
}

fn compile(file: &Path) -> Result<Outcome, Failure> {
    let c = load(file)?;
    let text = serialize(&c);
    let ty = c.ty().to_string();
    Ok(ok(
        json!({ "circuit": text, "type": ty }),
        format!("{text}\n  : {ty}"),
    ))
}

fn infer(file: &Path, limits: &Limits) -> Result<Outcome, Failure> {
    let class = eval_with(&load(file)?, limits)?.canonical_class();
    Ok(ok(infer_json(&class), class_human(&class)))
}

fn equiv(a: &Path, b: &Path, limits: &Limits) -> Result<Outcome, Failure> {
    let (c, d) = (load(a)?, load(b)?);
    let report = equiv_report(&c, &d, limits)?;
    let forms = report
        .normal_forms
        .as_ref()
        .map(|(x, y)| json!([serialize(x), serialize(y)]));
    let mut human = format!(
        "{}\nleft:\n{}\nright:\n{}",
        if report.equivalent { "equivalent" } else { "not equivalent" },
        class_human(&report.class_left),
        class_human(&report.class_right)
    );
    if let Some((x, y)) = &report.normal_forms {
        human.push_str(&format!("\nnormal forms:\n  {}\n  {}", serialize(x), serialize(y)));
    }
    Ok(Outcome {
        code: if report.equivalent { 0 } else { 1 },
        json: json!({
            "equivalent": report.equivalent,
            "left": infer_json(&report.class_left),
            "right": infer_json(&report.class_right),
            "normal_forms": forms.unwrap_or(Value::Null),
        }),
        human,
    })
}

fn normalize(file: &Path, limits: &Limits) -> Result<Outcome, Failure> {
    let c = load(file)?;
    let nf = normal_form_with(&c, limits)?;
    let text = serialize(&nf);
    Ok(ok(json!({ "normal_form": text, "type": nf.ty().to_string() }), text))
}

fn eliminate(file: &Path, limits: &Limits) -> Result<Outcome, Failure> {
    let c = load(file)?;
    let failing = eval_with(&c, limits)?.canonical_class().is_bottom();
    let out = eliminate_conditioning_with(&c, limits)?;
    let text = serialize(&out);
    Ok(ok(
        json!({ "circuit": text, "type": out.ty().to_string(), "failure": failing }),
        if failing { format!("{text}\n  (fails everywhere)") } else { text },
    ))
}

fn soundness_json(r: &SoundnessReport) -> Value {
    json!({
        "rule": r.rule.name(),
        "criterion": if r.projective { "proportional" } else { "exact" },
        "trials": r.trials,
        "passed": r.passed,
        "exact": r.exact,
        "failures": r.failures.iter().map(|f| json!({
            "operands": f.operands,
            "reason": f.reason,
        })).collect::<Vec<_>>(),
    })
}

fn axioms_check(trials: usize, seed: u64) -> Outcome {
    let reports = check_all(trials, seed);
    let all_ok = reports.iter().all(SoundnessReport::ok);
    let mut human = format!("{:<12} {:<13} {:>7} {:>7}  status\n", "rule", "criterion", "passed", "exact");
    for r in &reports {
        human.push_str(&format!(
            "{:<12} {:<13} {:>7} {:>7}  {}\n",
            r.rule.name(),
            if r.projective { "proportional" } else { "exact" },
            format!("{}/{}", r.passed, r.trials),
            r.exact,
            if r.ok() { "ok" } else { "FAIL" }
        ));
    }
    human.push_str(if all_ok { "all rules sound" } else { "some rules FAILED" });
    Outcome {
        code: if all_ok { 0 } else { 1 },
        json: json!({
            "trials": trials,
            "seed": seed,
            "ok": all_ok,
            "rules": reports.iter().map(soundness_json).collect::<Vec<_>>(),
        }),
        human,
    }
}

fn derive_check(file: &Path) -> Result<Outcome, Failure> {
    let text = read(file)?;
    let derivation = Derivation::from_json(&text).map_err(|e| Failure {
        code: if e.step.is_none() { 2 } else { 1 },
        message: format!("{}: {e}", file.display()),
    })?;
    match check_derivation(&derivation) {
        Ok(report) => {
            let mut human = String::new();
            for t in &report.trace {
                match &t.rule {
                    None => human.push_str(&format!("start     {}\n", serialize(&t.term))),
                    Some(r) => human.push_str(&format!(
                        "step {:<4} {r}\n          {}\n",
                        t.step.unwrap_or_default(),
                        serialize(&t.term)
                    )),
                }
            }
            human.push_str(if report.ok() {
                "derivation reaches the end term"
            } else {
                "derivation does NOT reach the end term"
            });
            Ok(Outcome {
                code: if report.ok() { 0 } else { 1 },
                json: report.to_json(),
                human,
            })
        }
        Err(e) => {
            if matches!(e.error, Error::CapExceeded { .. }) {
                return Err(Failure {
                    code: 3,
                    message: e.to_string(),
                });
            }
            Ok(Outcome {
                code: 1,
                json: json!({ "ok": false, "step": e.step, "error": e.error.to_string() }),
                human: format!("rejected: {e}"),
            })
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let limits = Limits {
        max_cells: cli.global.cap,
    };
    match &cli.command {
        Command::Compile { file } => compile(file),
        Command::Infer { file } => infer(file, &limits),
        Command::Equiv { a, b } => equiv(a, b, &limits),
        Command::Normalize { file } => normalize(file, &limits),
        Command::Eliminate { file } => eliminate(file, &limits),
        Command::AxiomsCheck { trials, seed } => Ok(axioms_check(*trials, *seed)),
        Command::DeriveCheck { file } => derive_check(file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.global.human {
                println!("{}", out.human);
            } else {
                println!("{}", out.json);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
