use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiband"))
        .args(args)
        .output()
        .unwrap()
}

fn run_on(cmd: &str, file: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, file.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn lines(o: &Output) -> Vec<Value> {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("stdout line is JSON"))
        .collect()
}

fn last(o: &Output) -> Value {
    lines(o).pop().expect("some output")
}

fn temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const CERTAIN: &str = r#"{"sense": "max", "n": 2, "m": 1, "c": [1, 1], "A": [[1, 2]], "b": [4]}"#;

#[test]
fn validate_fixture() {
    let o = run_on("validate", &data("fixture.json"), &[]);
    assert_eq!(code(&o), 0);
    let v = last(&o);
    assert_eq!(v["valid"], true);
    assert_eq!(v["profiles"][0]["theta"], serde_json::json!([0, 2, 1]));
}

#[test]
fn validate_rejects_bad_schemes() {
    let bad_u0 = temp(
        r#"{"sense": "max", "n": 2, "m": 1, "c": [1, 1], "A": [[1, 1]], "b": [4],
            "bands": {"K_minus": 0, "K_plus": 1, "u": {"0": 1, "1": 1},
                      "dev": [{"i": 0, "j": 0, "d": {"1": 1}}]}}"#,
    );
    let o = run_on("validate", bad_u0.path(), &[]);
    assert_eq!(code(&o), 1);
    assert_eq!(last(&o)["valid"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("u_0"));

    let non_monotone = temp(
        r#"{"sense": "max", "n": 2, "m": 1, "c": [1, 1], "A": [[1, 1]], "b": [4],
            "bands": {"K_minus": 0, "K_plus": 2,
                      "dev": [{"i": 0, "j": 0, "d": {"1": 3, "2": 2}}]}}"#,
    );
    assert_eq!(code(&run_on("validate", non_monotone.path(), &[])), 1);

    let malformed = temp(r#"{"sense": "max", "n": 2"#);
    let o = run_on("validate", malformed.path(), &[]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn both_methods_agree_on_fixture() {
    let f = data("fixture.json");
    let compact = last(&run_on("solve", &f, &["--method", "compact"]));
    let o = run_on("solve", &f, &["--method", "cutting-plane"]);
    assert_eq!(code(&o), 0);
    let log = lines(&o);
    assert!(log.len() >= 2);
    let cp = log.last().unwrap();
    let (a, b) = (
        compact["value"].as_f64().unwrap(),
        cp["value"].as_f64().unwrap(),
    );
    assert!((a - b).abs() < 1e-6);
    assert!((a - 10.0 / 3.0).abs() < 1e-6);
    assert_eq!(cp["method"], "cutting-plane");
}

#[test]
fn certain_instance_gives_nominal_optimum() {
    let f = temp(CERTAIN);
    for method in ["compact", "cutting-plane"] {
        let v = last(&run_on("solve", f.path(), &["--method", method]));
        assert!((v["value"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    }
}

#[test]
fn min_sense_restores_sign() {
    let f = temp(r#"{"sense": "min", "n": 2, "m": 1, "c": [1, 2], "A": [[-1, -1]], "b": [-3]}"#);
    let v = last(&run_on("solve", f.path(), &[]));
    assert!((v["value"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn gen_is_deterministic_and_valid() {
    let args = ["gen", "--n", "3", "--m", "1", "--seed", "7"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let f = temp(std::str::from_utf8(&a.stdout).unwrap());
    assert_eq!(code(&run_on("validate", f.path(), &[])), 0);

    let bs: Value =
        serde_json::from_slice(&run(&["gen", "--n", "4", "--bands", "1", "--seed", "3"]).stdout)
            .unwrap();
    assert_eq!(bs["bands"]["K_minus"], 0);
    assert_eq!(bs["bands"]["K_plus"], 1);
}

#[test]
fn generated_suite_methods_agree() {
    for seed in 0..8 {
        let s = seed.to_string();
        let mut args = vec![
            "gen",
            "--n",
            "4",
            "--m",
            "2",
            "--bands",
            "2",
            "--negative",
            "1",
            "--seed",
            &s,
        ];
        if seed % 2 == 1 {
            args.push("--binary");
        }
        let f = temp(std::str::from_utf8(&run(&args).stdout).unwrap());
        let a = last(&run_on("solve", f.path(), &["--method", "compact"]));
        let b = last(&run_on("solve", f.path(), &["--method", "cutting-plane"]));
        let (a, b) = (a["value"].as_f64().unwrap(), b["value"].as_f64().unwrap());
        assert!((a - b).abs() < 1e-6, "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn status_exit_codes() {
    let infeasible = temp(
        r#"{"sense": "max", "n": 1, "m": 2, "c": [1], "A": [[-1], [1]], "b": [-1, 5],
            "bands": {"K_minus": 0, "K_plus": 1, "l": {"1": 1}, "u": {"1": 1},
                      "dev": [{"i": 0, "j": 0, "d": {"1": 2}}],
                      "row_bounds": [{"i": 1, "l": {"1": 0}}]}}"#,
    );
    for method in ["compact", "cutting-plane"] {
        assert_eq!(
            code(&run_on("solve", infeasible.path(), &["--method", method])),
            3
        );
    }
    let unbounded =
        temp(r#"{"sense": "max", "n": 2, "m": 1, "c": [1, 1], "A": [[1, -1]], "b": [1]}"#);
    for method in ["compact", "cutting-plane"] {
        let o = run_on("solve", unbounded.path(), &["--method", method]);
        assert_eq!(code(&o), 4);
        assert!(o.stdout.is_empty());
    }
    let o = run_on(
        "solve",
        &data("fixture.json"),
        &["--method", "cutting-plane", "--max-iterations", "1"],
    );
    assert_eq!(code(&o), 5);
}

#[test]
fn check_and_separate() {
    let f = data("fixture.json");
    let v = last(&run_on("check", &f, &["--x", "1,1,1", "--exact"]));
    assert_eq!(v["robust"], false);
    assert_eq!(v["rows"][0]["lhs"], 13.0);
    assert_eq!(v["exact"]["deviations"][0], 10.0);
    let cuts = lines(&run_on("separate", &f, &["--x", "1,1,1"]));
    assert_eq!(cuts.len(), 1);
    assert_eq!(cuts[0]["coeffs"], serde_json::json!([5.0, 6.0, 2.0]));
    assert!(lines(&run_on("separate", &f, &["--x", "0,0,0"])).is_empty());
    assert_eq!(code(&run_on("check", &f, &["--x", "1,1"])), 1);
}

#[test]
fn binary_solve_examples() {
    let sp = temp(
        r#"{"nodes": 2, "edges": [{"u": 0, "v": 1, "c": 3, "d": {"1": 1}}], "source": 0, "target": 1, "u": {"1": 0}}"#,
    );
    let v = last(&run_on("binary-solve", sp.path(), &["--oracle", "sp"]));
    assert_eq!(v["value"], 3.0);
    let mst = temp(
        r#"{"nodes": 3, "edges": [{"u": 0, "v": 1, "c": 1, "d": {"1": 0.5}},
                                  {"u": 1, "v": 2, "c": 2, "d": {"1": 0.5}},
                                  {"u": 0, "v": 2, "c": 3, "d": {"1": 0.5}}], "u": {"1": 0}}"#,
    );
    assert_eq!(
        last(&run_on("binary-solve", mst.path(), &["--oracle", "mst"]))["value"],
        3.0
    );
    let ex = temp(
        r#"{"n": 2, "c": [5.5, 2], "d": [{"1": 1}, {"1": 1}], "points": [[1, 0], [0, 1]], "u": {"1": 0}}"#,
    );
    let v = last(&run_on(
        "binary-solve",
        ex.path(),
        &["--oracle", "explicit", "--prune"],
    ));
    assert_eq!(v["x"], serde_json::json!([0, 1]));
    assert_eq!(v["value"], 2.0);
}

#[test]
fn bound_reports_each_row() {
    let f = temp(
        r#"{"sense": "max", "n": 2, "m": 1, "c": [1, 1], "A": [[1, 1]], "b": [10],
            "bands": {"K_minus": -1, "K_plus": 1,
                      "dev": [{"i": 0, "j": 0, "d": {"-1": -1, "1": 1}},
                              {"i": 0, "j": 1, "d": {"-1": -1, "1": 1}}]},
            "samples": [{"i": 0, "j": 0, "values": [0.5, 1.0, 1.5, 1.0]},
                        {"i": 0, "j": 1, "values": [1.0, 1.2, 0.8, 1.0]}]}"#,
    );
    let o = run_on(
        "bound",
        f.path(),
        &[
            "--x", "2,3", "--beta", "0.05", "--tmax", "10", "--grid", "64",
        ],
    );
    assert_eq!(code(&o), 0);
    let v = last(&o);
    let b = v["bound_clamped"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&b));
    assert!((v["confidence"].as_f64().unwrap() - 0.95f64.powi(2)).abs() < 1e-12);
    let q = last(&run_on("bound", f.path(), &["--x", "2,0", "--quadratic"]));
    assert_eq!(q["excluded_vars"], serde_json::json!([1]));
    assert_eq!(q["radius"], "quadratic");

    let o = run_on("bound", &data("fixture.json"), &["--x", "1,1,1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn exported_counterpart_has_same_optimum() {
    let f = data("fixture.json");
    let o = run_on("export-compact", &f, &[]);
    assert_eq!(code(&o), 0);
    let exported: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(exported["n"], 27);
    let g = temp(std::str::from_utf8(&o.stdout).unwrap());
    let a = last(&run_on("solve", &f, &[]))["value"].as_f64().unwrap();
    let b = last(&run_on("solve", g.path(), &[]))["value"]
        .as_f64()
        .unwrap();
    assert!((a - b).abs() < 1e-9);
}
