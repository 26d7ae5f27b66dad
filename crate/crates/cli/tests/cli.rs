use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use teamcontract::{instances, Instance};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_teamcontract"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = run(&all);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    path
}

#[test]
fn gen_writes_a_loadable_instance() {
    let dir = TempDir::new().unwrap();
    let path = gen(
        dir.path(),
        "inst.json",
        &["--family", "additive_gap", "--n", "4"],
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let loaded = Instance::from_json_str(&text).unwrap();
    assert_eq!(loaded, instances::additive_gap(4).unwrap());

    let printed = run(&["gen", "--family", "additive_gap", "--n", "4"]);
    assert_eq!(String::from_utf8_lossy(&printed.stdout).trim(), text.trim());
}

#[test]
fn gap_of_additive_family() {
    let dir = TempDir::new().unwrap();
    let path = gen(
        dir.path(),
        "inst.json",
        &["--family", "additive_gap", "--n", "4"],
    );
    let out = run(&["gap", "--in", path.to_str().unwrap(), "--b", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_out(&out);
    assert_eq!(report["gap"]["gap_wg"], 3.0);
    assert_eq!(report["gap"]["opt_w"], 12.0);
}

#[test]
fn every_method_verifies() {
    let dir = TempDir::new().unwrap();
    let xos = gen(
        dir.path(),
        "xos.json",
        &["--family", "random_xos", "--n", "8", "--seed", "5"],
    );
    let cov = gen(
        dir.path(),
        "cov.json",
        &["--family", "random_coverage", "--n", "9", "--seed", "2"],
    );
    let sub = gen(
        dir.path(),
        "sub.json",
        &[
            "--family",
            "random_sym_table",
            "--n",
            "300",
            "--shape",
            "submodular",
            "--cost-mode",
            "sorted",
        ],
    );
    let sx = gen(
        dir.path(),
        "sx.json",
        &["--family", "random_sym_table", "--n", "500", "--seed", "9"],
    );
    let cases: Vec<(&Path, Vec<&str>)> = vec![
        (&xos, vec!["--method", "alg3", "--preset", "xos188"]),
        (&cov, vec!["--method", "alg3", "--preset", "submod468"]),
        (
            &xos,
            vec![
                "--method",
                "bruteforce",
                "--objective",
                "utility",
                "--b",
                "0.8",
                "--B",
                "2",
            ],
        ),
        (&xos, vec!["--method", "singleton"]),
        (&xos, vec!["--method", "value_b", "--b", "0.5"]),
        (&xos, vec!["--method", "value_B", "--B", "0.5"]),
        (&xos, vec!["--method", "welfare_b", "--b", "0.6"]),
        (&xos, vec!["--method", "welfare_b", "--b", "1.5"]),
        (&sub, vec!["--method", "sym_submod"]),
        (&sx, vec!["--method", "sxos"]),
    ];
    for (path, extra) in cases {
        let mut args = vec!["solve", "--in", path.to_str().unwrap(), "--verify"];
        args.extend(extra.iter().copied());
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        let report = json_out(&out);
        assert_eq!(report["verification"]["ok"], true, "{args:?}");
    }
}

#[test]
fn verify_detects_tampering() {
    let dir = TempDir::new().unwrap();
    let inst = gen(
        dir.path(),
        "inst.json",
        &["--family", "random_xos", "--n", "6", "--seed", "1"],
    );
    let rep = dir.path().join("rep.json");
    let out = run(&[
        "solve",
        "--in",
        inst.to_str().unwrap(),
        "--method",
        "alg3",
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let ok = run(&[
        "verify",
        "--in",
        inst.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));

    let mut report: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    let f = report["f"].as_f64().unwrap();
    report["f"] = (f * 1.01 + 1.0).into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, report.to_string()).unwrap();
    let out = run(&[
        "verify",
        "--in",
        inst.to_str().unwrap(),
        "--report",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("f: report"));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    std::fs::write(
        &missing,
        r#"{"n": 2, "valuefn": {"kind": "additive", "weights": [1, 2]}}"#,
    )
    .unwrap();
    let out = run(&["gap", "--in", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/costs"));

    let family = dir.path().join("family.json");
    std::fs::write(
        &family,
        r#"{"n": 3, "costs": 1, "valuefn": {"kind": "sym_formula", "family": "nope"}}"#,
    )
    .unwrap();
    let out = run(&["solve", "--in", family.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/valuefn/family"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let big = gen(
        dir.path(),
        "big.json",
        &["--family", "random_xos", "--n", "22"],
    );
    let out = run(&["gap", "--in", big.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "solve",
        "--in",
        big.to_str().unwrap(),
        "--method",
        "bruteforce",
    ]);
    assert_eq!(out.status.code(), Some(3));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["gap", "--in", big.to_str().unwrap(), "--nope"])
            .status
            .code(),
        Some(2)
    );

    // Methods refuse instances outside their preconditions.
    let out = run(&["solve", "--in", big.to_str().unwrap(), "--method", "sxos"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "solve",
        "--in",
        big.to_str().unwrap(),
        "--method",
        "alg3",
        "--b",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "solve",
        "--in",
        big.to_str().unwrap(),
        "--method",
        "value_b",
        "--objective",
        "welfare",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let inst = gen(
        dir.path(),
        "inst.json",
        &["--family", "random_coverage", "--n", "10", "--seed", "4"],
    );
    let args = [
        "solve",
        "--in",
        inst.to_str().unwrap(),
        "--method",
        "alg3",
        "--verify",
    ];
    let strip = |out: Output| {
        let mut v = json_out(&out);
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v.to_string()
    };
    assert_eq!(strip(run(&args)), strip(run(&args)));
}

#[test]
fn large_symmetric_instance() {
    let dir = TempDir::new().unwrap();
    let inst = gen(
        dir.path(),
        "tight.json",
        &[
            "--family",
            "sxos_tight",
            "--n",
            "1000000",
            "--epsilon",
            "0.1",
        ],
    );
    let out = run(&["solve", "--in", inst.to_str().unwrap(), "--method", "sxos"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json_out(&out);
    assert_eq!(report["team"]["size"], 1);
    assert!(report["queries"]["value_queries"].as_u64().unwrap() <= 88);
}
