use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn unitrans(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitrans"))
        .args(args)
        .env_remove("UNITRANS_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_record(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(out.stderr.trim_ascii()).expect("stderr holds one JSON record")
}

/// Header comments as `(key, value)` and the remaining CSV rows.
fn split_csv(text: &str) -> (Vec<(String, String)>, Vec<Vec<String>>) {
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once(' ').unwrap();
            header.push((k.to_string(), v.to_string()));
        } else {
            rows.push(line.split(',').map(str::to_string).collect());
        }
    }
    (header, rows)
}

fn header_value<'a>(header: &'a [(String, String)], key: &str) -> &'a str {
    &header.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no header {key}")).1
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn identity_walk_front_leaves_every_ball() {
    let text = stdout(&unitrans(&["simulate", "--preset", "identity", "--horizon", "64"]));
    let (header, rows) = split_csv(&text);
    assert_eq!(header_value(&header, "unitrans"), "simulate");
    assert_eq!(rows[0], ["k", "quantity", "parameter", "value"]);
    let mut checked = 0;
    for r in &rows[1..] {
        let k: i64 = r[0].parse().unwrap();
        match r[1].as_str() {
            "mass" => assert!((r[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-12),
            "p_out" => {
                // delta_0 moves two basis indices per step
                let radius: i64 = r[2].parse().unwrap();
                let expected = if 2 * k > radius { 1.0 } else { 0.0 };
                assert!((r[3].parse::<f64>().unwrap() - expected).abs() < 1e-12, "k {k} R {radius}: {}", r[3]);
                checked += 1;
            }
            _ => {}
        }
    }
    // radii 1, 2, 4, ..., 128 at each of the 64 times
    assert_eq!(checked, 64 * 8);
}

#[test]
fn fib_bound_at_zero_angles() {
    let beta_at_one = |k: &str| {
        let text = stdout(&unitrans(&["fib-bound", "--K", k, "--z-grid", "8", "--trunc-N", "32"]));
        let (header, rows) = split_csv(&text);
        assert_eq!(header_value(&header, "K"), k);
        let beta = column(&rows, "beta");
        assert_eq!(rows[1][column(&rows, "arg")], "0");
        assert_eq!(rows[1][column(&rows, "I")], "0");
        let gamma1: f64 = rows[1][column(&rows, "gamma1")].parse().unwrap();
        assert!((gamma1 - 0.0013853329838519003).abs() < 1e-15);
        let value: f64 = rows[1][beta].parse().unwrap();
        let max: f64 = header_value(&header, "max-beta").parse().unwrap();
        (value, max)
    };
    let (b16, max16) = beta_at_one("16");
    assert!((b16 - 8.395605e-5).abs() < 1e-10, "{b16}");
    assert_eq!(b16, max16);
    let (b2, _) = beta_at_one("2");
    assert!((b2 - 3.078044e-4).abs() < 1e-9, "{b2}");
}

#[test]
fn invalid_coefficient_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("alphas.txt");
    std::fs::write(&input, "0 0.5 0\n1 1.0 0\n2 0 0\n").unwrap();
    let csv = dir.path().join("out.csv");
    let summary = dir.path().join("out.json");
    let out = unitrans(&[
        "simulate",
        "--verblunsky",
        input.to_str().unwrap(),
        "--horizon",
        "8",
        "--output",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    assert_eq!(rec["status"], "error");
    assert_eq!(rec["kind"], "parse");
    assert_eq!(rec["line"], 2);
    assert_eq!(rec["path"], input.to_str().unwrap());
    assert!(out.stdout.is_empty());
    let left: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, ["alphas.txt"]);
}

#[test]
fn outputs_do_not_depend_on_run_or_worker_count() {
    let args = [
        "subordinacy",
        "--preset",
        "random-cmv",
        "--seed",
        "7",
        "--z-grid",
        "12",
        "--l-max",
        "8",
        "--boundary-samples",
        "4",
    ];
    let run = |workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_unitrans"))
            .args(args)
            .env("UNITRANS_WORKERS", workers)
            .output()
            .unwrap();
        stdout(&out)
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("3"));

    let walk = ["simulate", "--preset", "random-coins", "--seed", "3", "--horizon", "40"];
    assert_eq!(stdout(&unitrans(&walk)), stdout(&unitrans(&walk)));
}

#[test]
fn seed_changes_the_operator() {
    let run = |seed: &str| stdout(&unitrans(&["simulate", "--preset", "random-coins", "--seed", seed, "--horizon", "16"]));
    let (a, b) = (run("1"), run("2"));
    let body = |t: &str| t.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_ne!(body(&a), body(&b));
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "experiment = \"simulate\"\nhorizon = 4\nradii = [2]\n\n[operator]\npreset = \"hadamard\"\n",
    )
    .unwrap();
    let from_file = stdout(&unitrans(&["simulate", "--config", config.to_str().unwrap()]));
    let (header, rows) = split_csv(&from_file);
    assert_eq!(header_value(&header, "horizon"), "4");
    assert_eq!(rows.len(), 1 + 4 * 5);

    let overridden = stdout(&unitrans(&["simulate", "--config", config.to_str().unwrap(), "--horizon", "5"]));
    let flags_only = stdout(&unitrans(&["simulate", "--preset", "hadamard", "--horizon", "5", "--radii", "2"]));
    // the digest covers the resolved configuration, not where it came from
    assert_eq!(overridden, flags_only);
    assert_ne!(overridden, from_file);
}

#[test]
fn config_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let typo = write("typo.toml", "experiment = \"simulate\"\nhorizn = 4\n");
    let out = unitrans(&["simulate", "--config", typo.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["kind"], "config");

    let other = write("other.toml", "experiment = \"exponents\"\nhorizon = 4\n");
    let out = unitrans(&["simulate", "--config", other.to_str().unwrap(), "--preset", "identity"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_record(&out)["message"].as_str().unwrap().contains("exponents"));

    let missing = dir.path().join("absent.toml");
    let out = unitrans(&["simulate", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["kind"], "io");
}

#[test]
fn operator_source_is_required_once() {
    let out = unitrans(&["simulate", "--horizon", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = unitrans(&["simulate", "--horizon", "4", "--preset", "identity", "--coins", "x.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let out = unitrans(&["simulate", "--horizon", "4", "--preset", "rotation"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_record(&out)["message"].as_str().unwrap().contains("--theta"));
}

#[test]
fn resource_errors_report_feasible_size() {
    let out = unitrans(&["parseval-check", "--preset", "hadamard", "--horizons", "16,100000"]);
    assert_eq!(out.status.code(), Some(3));
    let rec = error_record(&out);
    assert_eq!(rec["kind"], "resource");
    assert_eq!(rec["feasible"], 1024);

    let out = unitrans(&["simulate", "--preset", "identity", "--horizon", "1000000000"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["feasible"], 1 << 18);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = unitrans(&["simulate", "--preset", "identity", "--horizon", "4", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["kind"], "usage");
}

#[test]
fn help_documents_every_flag() {
    let expected: &[(&str, &[&str])] = &[
        ("simulate", &["--horizon", "--radii", "--p", "--preset", "--coins", "--verblunsky", "--seed"]),
        ("exponents", &["--horizon", "--k-min", "--p"]),
        ("parseval-check", &["--horizons", "--site", "--quad-nodes", "--window-factor"]),
        ("subordinacy", &["--z-grid", "--l-min", "--l-max", "--boundary-samples"]),
        ("fib-bound", &["--theta-a", "--theta-b", "--K", "--K-table", "--z-grid", "--trunc-N"]),
        ("measure-diag", &["--measure", "--trunc-N", "--z0", "--alpha", "--horizons", "--levels", "--r-grid"]),
    ];
    for (cmd, flags) in expected {
        let text = stdout(&unitrans(&[cmd, "--help"]));
        for flag in flags.iter().chain(&["--config", "--output", "--summary"]) {
            assert!(text.contains(flag), "{cmd} --help lacks {flag}");
        }
    }
    let top = stdout(&unitrans(&["--help"]));
    assert!(top.contains("UNITRANS_WORKERS"));
}

#[test]
fn summary_shares_the_csv_digest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("exp.csv");
    let out = unitrans(&[
        "exponents",
        "--preset",
        "hadamard",
        "--horizon",
        "256",
        "--output",
        csv.to_str().unwrap(),
    ]);
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let (header, rows) = split_csv(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["experiment"], "exponents");
    assert_eq!(summary["config_sha256"], header_value(&header, "config-sha256"));
    assert_eq!(rows[0], ["K", "quantity", "parameter", "value"]);
    for fit in summary["results"]["exponents"].as_array().unwrap() {
        let e = fit["estimate"].as_f64().unwrap();
        assert!(e > 0.9 && e <= 1.0 + 1e-9, "hadamard walk is ballistic: {e}");
    }
}

#[test]
fn digest_covers_input_file_contents() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("alphas.txt");
    let digest = |text: &str| {
        std::fs::write(&input, text).unwrap();
        let out = unitrans(&["exponents", "--verblunsky", input.to_str().unwrap(), "--half-line", "--horizon", "8"]);
        let (header, _) = split_csv(&stdout(&out));
        header_value(&header, "config-sha256").to_string()
    };
    let file = |last: f64| {
        let mut text: String = (0..39).map(|n| format!("{n} 0.1 0\n")).collect();
        text.push_str(&format!("39 {last} 0\n"));
        text
    };
    let a = digest(&file(0.2));
    assert_ne!(a, digest(&file(0.3)));
    assert_eq!(a, digest(&file(0.2)));
}

#[test]
fn parseval_on_the_free_walk() {
    let text = stdout(&unitrans(&["parseval-check", "--preset", "identity", "--horizons", "8,16"]));
    let (_, rows) = split_csv(&text);
    let rel = column(&rows, "reldiff");
    assert_eq!(rows.len(), 3);
    for r in &rows[1..] {
        assert!(r[rel].parse::<f64>().unwrap() < 1e-8, "{r:?}");
    }
}

#[test]
fn free_cmv_subordinacy_exponents() {
    let text = stdout(&unitrans(&["subordinacy", "--preset", "free-cmv", "--z-grid", "4", "--l-max", "10"]));
    let (_, rows) = split_csv(&text);
    assert_eq!(rows[0], ["z_re", "z_im", "arg", "gamma1", "gamma2", "alpha"]);
    for r in &rows[1..] {
        let [g1, g2, a] = [3, 4, 5].map(|i| r[i].parse::<f64>().unwrap());
        assert!((g1 - 0.5).abs() < 0.02 && (g2 - 0.5).abs() < 0.02, "{r:?}");
        assert!((a - 1.0).abs() < 0.02, "{r:?}");
    }
}

fn write_measure(path: &Path, atoms: &[(f64, f64)]) {
    let text: String = atoms
        .iter()
        .map(|(t, w)| format!("{} {} {}\n", t.cos(), t.sin(), w))
        .collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn measure_diag_reads_a_measure_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mu.txt");
    let m = 64;
    let atoms: Vec<(f64, f64)> = (0..m)
        .map(|j| (std::f64::consts::TAU * (j as f64 + 0.5) / m as f64, 1.0 / m as f64))
        .collect();
    write_measure(&input, &atoms);
    let out = unitrans(&["measure-diag", "--measure", input.to_str().unwrap(), "--horizons", "4,8", "--levels", "2,3"]);
    let text = stdout(&out);
    let (_, rows) = split_csv(&text);
    assert_eq!(rows[0], ["quantity", "parameter", "value"]);
    let arcs: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "light_arcs").collect();
    assert_eq!(arcs.len(), 2);

    let out = unitrans(&[
        "measure-diag",
        "--measure",
        input.to_str().unwrap(),
        "--preset",
        "free-cmv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn measure_diag_from_fibonacci_truncation_keeps_full_mass() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("md.csv");
    let out = unitrans(&[
        "measure-diag",
        "--preset",
        "fibonacci",
        "--theta-a",
        "0.5",
        "--theta-b",
        "1.0",
        "--trunc-N",
        "128",
        "--output",
        csv.to_str().unwrap(),
    ]);
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["results"]["atoms"], 128);
    let mass = summary["results"]["total_mass"].as_f64().unwrap();
    assert!((mass - 1.0).abs() < 1e-12, "{mass}");
}

#[test]
fn fib_bound_reads_a_k_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("k.txt");
    // constant table reproduces the constant flag
    std::fs::write(&table, "# arg K\n0 2\n3 2\n").unwrap();
    let from_table = stdout(&unitrans(&["fib-bound", "--K-table", table.to_str().unwrap(), "--z-grid", "8", "--trunc-N", "64"]));
    let from_flag = stdout(&unitrans(&["fib-bound", "--K", "2", "--z-grid", "8", "--trunc-N", "64"]));
    let rows = |text: &str| split_csv(text).1;
    assert_eq!(rows(&from_table), rows(&from_flag));

    std::fs::write(&table, "0 2\n1 1\n").unwrap();
    let out = unitrans(&["fib-bound", "--K-table", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    assert_eq!(rec["kind"], "parse");
    assert_eq!(rec["line"], 2);

    let out = unitrans(&["fib-bound", "--K", "2", "--K-table", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
