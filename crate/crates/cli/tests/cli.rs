use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn pi_file(name: &str) -> String {
    root().join("data/pi").join(name).to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn deformq_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_deformq"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn deformq(args: &[&str]) -> Run {
    deformq_env(args, &[])
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.json"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&v).unwrap()
}

fn json_checked(name: &str, args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let r = deformq(&full);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let errors: Vec<String> = schema(name).iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{args:?}: {errors:?}\n{v}");
    v
}

#[test]
fn graphs_lists_encodings() {
    let r = deformq(&["graphs", "--order", "1"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "1; L R\n1; R L\n");
    for (n, count) in [(0, 1), (2, 36), (3, 1728)] {
        let v = json_checked("graphs", &["graphs", "--order", &n.to_string()]);
        assert_eq!(v["count"], count);
        assert_eq!(v["graphs"].as_array().unwrap().len(), count);
    }
    let v = json_checked("graphs", &["graphs", "--order", "2"]);
    assert_eq!(v["graphs"][0], serde_json::json!([[2, "L"], [1, "L"]]));
}

#[test]
fn monte_carlo_weight_is_reproducible() {
    let args = ["weight", "--graph", "1; L R", "--mc", "1000000", "42"];
    let a = deformq(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let mean: f64 = a.stdout.split_whitespace().next().unwrap().parse().unwrap();
    assert!((mean - 0.5).abs() < 0.01, "{}", a.stdout);
    assert!(a.stdout.contains('±'));
    assert_eq!(deformq(&args).stdout, a.stdout);
    let one = deformq_env(&args, &[("DEFORMQ_THREADS", "1")]);
    assert_eq!(one.stdout, a.stdout);

    let v = json_checked("weight", &["weight", "--graph", "1; R L", "--mc", "100000", "3"]);
    assert_eq!(v["method"], "mc");
    assert!((v["mean"].as_f64().unwrap() + 0.5).abs() < 0.02);
}

#[test]
fn exact_weights() {
    assert_eq!(deformq(&["weight", "--graph", "2; L 2; 1 R"]).stdout, "1/24\n");
    assert_eq!(deformq(&["weight", "--graph", "2; L R; 1 L", "--exact"]).stdout, "-1/12\n");
    let v = json_checked("weight", &["weight", "--graph", "2; L R; L R"]);
    assert_eq!(v["value"], "1/4");
    assert_eq!(v["numeric"], 0.25);

    let missing = deformq(&["weight", "--graph", "3; L 2; 1 L; 2 R"]);
    assert_eq!(missing.code, 2);
    assert!(missing.stderr.contains("no weight available"));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.txt");
    std::fs::write(&file, "# community value\n3; L 2; 1 L; 2 R | 1/48\n").unwrap();
    let f = file.to_string_lossy();
    let r = deformq(&["weight", "--graph", "3; L 2; 1 L; 2 R", "--weights-file", &f]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "1/48\n"));

    std::fs::write(&file, "3; L 2; 1 L; 2 R 1/48\n").unwrap();
    let r = deformq(&["weight", "--graph", "3; L 2; 1 L; 2 R", "--weights-file", &f]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 1"), "{}", r.stderr);
}

#[test]
fn star_applies_to_polynomials() {
    let c = pi_file("constant2d.txt");
    let r = deformq(&["star", "--pi", &c, "--order", "2", "--apply", "x", "y"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "x*y + 1*h\n"));
    let r = deformq(&["star", "--pi", &c, "--order", "2", "--apply", "x", "y", "--dirac"]);
    assert_eq!(r.stdout, "x*y + 1/2*h\n");
    let r = deformq(&["star", "--pi", &c, "--order", "2", "--apply", "x^2", "y^2"]);
    assert_eq!(r.stdout, "x^2*y^2 + 4*x*y*h + 2*h^2\n");

    let so3 = pi_file("so3.txt");
    let v = json_checked("star", &["star", "--pi", &so3, "--order", "2", "--apply", "x", "y"]);
    assert_eq!(v["result"], "x*y + z*h");
    let v = json_checked("star", &["star", "--pi", &so3, "--order", "1"]);
    assert_eq!(v["operators"].as_array().unwrap().len(), 2);

    let text = deformq(&["star", "--pi", &pi_file("x_dx_dy.txt"), "--order", "1"]).stdout;
    assert!(text.starts_with("dim: 2\n"), "{text}");
    assert!(text.contains("order 1: arity 2:"), "{text}");
}

#[test]
fn verify_shipped_structures() {
    for name in ["constant2d.txt", "x_dx_dy.txt", "so3.txt"] {
        let r = deformq(&["verify", "--pi", &pi_file(name), "--order", "2"]);
        assert_eq!(r.code, 0, "{name}: {}{}", r.stdout, r.stderr);
        assert!(r.stdout.trim_end().ends_with("PASS"));
        let v = json_checked("verify", &["verify", "--pi", &pi_file(name), "--order", "2", "--dirac"]);
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn verify_reports_failure_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    // v = (−y, x, 1) has v · curl v = 2, so this bivector is not Poisson
    std::fs::write(&file, "dim: 3\ny * d/dz ^ d/dy + x * d/dz ^ d/dx + d/dx ^ d/dy\n").unwrap();
    let f = file.to_string_lossy();
    let r = deformq(&["verify", "--pi", &f, "--order", "2"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not Poisson"), "{}", r.stderr);

    let r = deformq(&["verify", "--pi", &f, "--order", "2", "--allow-non-poisson"]);
    assert_eq!(r.code, 1, "{}", r.stdout);
    assert!(r.stdout.trim_end().ends_with("FAIL"));
    let r = deformq(&["--format", "json", "verify", "--pi", &f, "--order", "2", "--allow-non-poisson"]);
    assert_eq!(r.code, 1);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(schema("verify").is_valid(&v));
    assert_eq!(v["first_failing_order"], 2);
}

#[test]
fn bracket_utilities() {
    let r = deformq(&["brackets", "gerstenhaber", "--dim", "1", "arity 1: x * d0/dx", "arity 2: d0/dx * d1/dx"]);
    assert_eq!(r.stdout, "arity 2: -2 * d0/dx * d1/dx\n");
    let r = deformq(&["brackets", "hochschild-d", "--dim", "1", "arity 1: x * d0/dx"]);
    assert_eq!(r.stdout, "arity 2: 0\n");
    let r = deformq(&["brackets", "schouten", "--dim", "2", "x * d/dy", "y * d/dx"]);
    assert_eq!(r.stdout, "x * d/dx - y * d/dy\n");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pi.txt");
    std::fs::write(&file, "d/dx ^ d/dy").unwrap();
    let at = format!("@{}", file.to_string_lossy());
    let v = json_checked("brackets", &["brackets", "hkr", "--dim", "2", &at]);
    assert_eq!(v["arity"], 2);
    assert_eq!(v["result"], "arity 2: -1/2 * d0/dy * d1/dx + 1/2 * d0/dx * d1/dy");
    let v = json_checked("brackets", &["brackets", "schouten", "--dim", "3", "x * d/dy ^ d/dz", "d/dx"]);
    assert_eq!(v["degree"], 2);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["frobnicate"],
        vec!["graphs"],
        vec!["graphs", "--order", "5"],
        vec!["weight", "--graph", "1; L L"],
        vec!["weight", "--graph", "1; L R", "--mc", "0", "1"],
        vec!["weight", "--graph", "1; L R", "--mc", "10", "1", "--exact"],
        vec!["weight", "--graph", "1; L R", "--precision", "40"],
        vec!["star", "--pi", "/nonexistent/pi.txt", "--order", "1"],
    ] {
        let r = deformq(&args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stdout);
        assert!(!r.stderr.is_empty());
    }
    let r = deformq(&["star", "--pi", &pi_file("so3.txt"), "--order", "1", "--apply", "x + * y", "y"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("at byte 4"), "{}", r.stderr);
    assert!(r.stderr.contains("expected grammar"), "{}", r.stderr);
    let r = deformq(&["weight", "--graph", "2; L R; 1 Q"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("byte"), "{}", r.stderr);
    let r = deformq_env(&["graphs", "--order", "1"], &[("DEFORMQ_THREADS", "many")]);
    assert_eq!(r.code, 2);
    assert_eq!(deformq(&["--help"]).code, 0);
}

#[test]
fn pi_file_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pi.txt");
    std::fs::write(&file, "# header\ndimension 2\nd/dx ^ d/dy\n").unwrap();
    let r = deformq(&["star", "--pi", &file.to_string_lossy(), "--order", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
}
