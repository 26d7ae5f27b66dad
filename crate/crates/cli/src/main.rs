//! `teamcontract`: generate instances, run solvers, compute gaps and verify
//! reports. Every command prints one JSON report on standard output.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 bad input, 3 capability
//! limit (enumeration caps, iteration caps).

// `!(x > 0.0)` is how inputs reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod check;
mod report;
mod solve;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};
use teamcontract::exact::gap;
use teamcontract::{Exec, Instance};

use args::{Cli, Command, GapArgs, GenArgs, SolveArgs, VerifyArgs};
use report::{digest, num};

/// Why a command did not succeed, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Capability(String),
    /// The report was produced but did not survive verification.
    Mismatch(Value, String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(..) => 1,
            Failure::Input(_) => 2,
            Failure::Capability(_) => 3,
        }
    }
}

impl From<teamcontract::Error> for Failure {
    fn from(e: teamcontract::Error) -> Self {
        match e {
            teamcontract::Error::Capability(_) | teamcontract::Error::IterationCap(_) => {
                Failure::Capability(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let pretty = cli.command.pretty();
    match run(cli.command, &argv) {
        Ok(report) => {
            emit(&report, pretty);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let code = failure.code();
            match failure {
                Failure::Mismatch(report, why) => {
                    emit(&report, pretty);
                    eprintln!("error: verification failed: {why}");
                }
                Failure::Input(why) | Failure::Capability(why) => eprintln!("error: {why}"),
            }
            ExitCode::from(code)
        }
    }
}

fn emit(report: &Value, pretty: bool) {
    let text = if pretty {
        serde_json::to_string_pretty(report)
    } else {
        serde_json::to_string(report)
    };
    // A closed pipe (`| head`) is not an error worth reporting.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", text.expect("reports are plain JSON"));
}

fn run(command: Command, argv: &[String]) -> Outcome<Value> {
    match command {
        Command::Gen(a) => run_gen(a, argv),
        Command::Solve(a) => run_solve(a, argv),
        Command::Gap(a) => run_gap(a, argv),
        Command::Verify(a) => run_verify(a, argv),
    }
}

pub fn load_instance(path: &Path) -> Outcome<Instance> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(Instance::from_json_str(&text)?)
}

pub fn save_instance(inst: &Instance, path: &Path) -> Outcome<()> {
    let text = serde_json::to_string(&inst.to_json()).expect("instances are plain JSON");
    fs::write(path, text + "\n")
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn load_json(path: &Path) -> Outcome<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Solver parallelism is opt-in: one thread unless `--threads` asks for more.
fn exec_for(threads: Option<usize>) -> Outcome<Exec> {
    match threads {
        None | Some(1) => Ok(Exec::Sequential),
        Some(0) => Err(Failure::Input("--threads must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(t) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Failure::Input(format!("cannot start {t} threads: {e}")))?;
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Err(Failure::Capability(
            "this build has no parallel support; rebuild with the `parallel` feature".into(),
        )),
    }
}

fn instance_info(inst: &Instance, path: Option<&Path>) -> Value {
    json!({
        "path": path.map(|p| p.display().to_string()),
        "digest": digest(inst),
        "n": inst.n(),
        "kind": inst.valuefn.kind_name(),
    })
}

fn run_gen(a: GenArgs, argv: &[String]) -> Outcome<Value> {
    let spec = a.spec()?;
    let inst = spec.generate()?;
    for w in inst.warnings() {
        eprintln!("warning: {w}");
    }
    match &a.out {
        Some(path) => {
            save_instance(&inst, path)?;
            Ok(json!({
                "command": "gen",
                "argv": argv,
                "family": spec.name(),
                "instance": instance_info(&inst, Some(path)),
            }))
        }
        None => Ok(inst.to_json()),
    }
}

fn run_solve(a: SolveArgs, argv: &[String]) -> Outcome<Value> {
    let inst = load_instance(&a.input)?;
    let exec = exec_for(a.threads)?;
    let request = a.request()?;
    let oracle = inst.oracle();
    let start = Instant::now();
    let solution = solve::solve(&inst, &oracle, &request, exec)?;
    let wall = start.elapsed();
    let mut report = json!({
        "command": "solve",
        "argv": argv,
        "instance": instance_info(&inst, Some(&a.input)),
    });
    solution.write(&mut report, &request, oracle.stats());
    report["wall_time_ms"] = num(wall.as_secs_f64() * 1e3);
    if a.verify {
        let v = check::verify_report(&inst, &report, exec)?;
        report["verification"] = v.to_json();
        if !v.ok {
            return Err(Failure::Mismatch(report, v.failures()));
        }
    }
    if let Some(out) = &a.out {
        let text = serde_json::to_string(&report).expect("reports are plain JSON");
        fs::write(out, text + "\n")
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(report)
}

fn run_gap(a: GapArgs, argv: &[String]) -> Outcome<Value> {
    let inst = load_instance(&a.input)?;
    let exec = exec_for(a.threads)?;
    if !(a.b > 0.0) {
        return Err(Failure::Input(format!("--b must be positive, got {}", a.b)));
    }
    let oracle = inst.oracle();
    let start = Instant::now();
    let rep = gap(&oracle, &inst.costs, a.b, exec)?;
    let wall = start.elapsed();
    Ok(json!({
        "command": "gap",
        "argv": argv,
        "instance": instance_info(&inst, Some(&a.input)),
        "b": num(a.b),
        "gap": {
            "opt_w": num(rep.opt_w),
            "opt_g": num(rep.opt_g),
            "opt_f": num(rep.opt_f),
            "gap_wg": num(rep.gap_wg),
        },
        "queries": oracle.stats(),
        "wall_time_ms": num(wall.as_secs_f64() * 1e3),
    }))
}

fn run_verify(a: VerifyArgs, argv: &[String]) -> Outcome<Value> {
    let inst = load_instance(&a.input)?;
    let claimed = load_json(&a.report)?;
    let exec = exec_for(a.threads)?;
    let v = check::verify_report(&inst, &claimed, exec)?;
    let report = json!({
        "command": "verify",
        "argv": argv,
        "instance": instance_info(&inst, Some(&a.input)),
        "verification": v.to_json(),
    });
    if v.ok {
        Ok(report)
    } else {
        let why = v.failures();
        Err(Failure::Mismatch(report, why))
    }
}
