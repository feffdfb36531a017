use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lt"))
}

fn run(args: &[&str]) -> Output {
    lt().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn symbol_file(dir: &Path, name: &str, coefficients: &[(i64, f64, f64)]) -> PathBuf {
    let entries: Vec<String> = coefficients
        .iter()
        .map(|(n, re, im)| format!("{{\"n\": {n}, \"re\": {re}, \"im\": {im}}}"))
        .collect();
    write(
        dir,
        name,
        &format!("{{\"coefficients\": [{}]}}", entries.join(", ")),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_wco_sum_example_passes_with_tiny_residual() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(
        dir.path(),
        "phi.json",
        &[(-2, 0.3, -0.1), (0, 1.0, 0.0), (3, -0.5, 0.25)],
    );
    let out_path = dir.path().join("v.json");
    let out = run(&[
        "verify",
        "--identity",
        "wco-sum",
        "--lambda-re",
        "0.5",
        "--symbol",
        s(&sym),
        "--sizes",
        "64",
        "--format",
        "json",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let result = &json[0];
    assert_eq!(result["identity"], "wco-sum");
    assert_eq!(result["N"], 64);
    assert_eq!(result["pass"], true);
    assert!(result["residual"].as_f64().unwrap() < 1e-14);
}

#[test]
fn build_at_lambda_zero_has_only_border_entries() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "e1.json", &[(1, 1.0, 0.0)]);
    let csv = dir.path().join("t.csv");
    let out = run(&[
        "build",
        "--lambda-re",
        "0",
        "--symbol",
        s(&sym),
        "--sizes",
        "4",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,m,re,im"));
    let mut count = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (n, m): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let value = (f[2].parse::<f64>().unwrap(), f[3].parse::<f64>().unwrap());
        if n > 0 && m > 0 {
            assert_eq!(value, (0.0, 0.0), "entry ({n},{m})");
        }
        count += 1;
    }
    assert_eq!(count, 16);
    assert!(text.contains("\n1,0,1.0000000000000000e0,0.0000000000000000e0\n"));
}

#[test]
fn exit_status_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let e2 = symbol_file(p, "e2.json", &[(2, 1.0, 0.0)]);
    let em1 = symbol_file(p, "em1.json", &[(-1, 1.0, 0.0)]);
    let bad = write(
        p,
        "bad.json",
        "{\"coefficients\": [\n  {\"n\": 1, \"re\": }\n]}",
    );
    let dup = write(
        p,
        "dup.json",
        r#"{"coefficients": [{"n": 1, "re": 1, "im": 0}, {"n": 1, "re": 2, "im": 0}]}"#,
    );
    let missing = p.join("missing.json");

    let cases: Vec<(Vec<&str>, i32)> = vec![
        (
            vec![
                "rank",
                "--lambda-re",
                "0.5",
                "--symbol",
                s(&e2),
                "--sizes",
                "8,32",
                "--rank-tol",
                "1e-10",
            ],
            0,
        ),
        // 0.5^29 falls under the default threshold, so the exact count is missed.
        (
            vec![
                "rank",
                "--lambda-re",
                "0.5",
                "--symbol",
                s(&e2),
                "--sizes",
                "32",
            ],
            1,
        ),
        (
            vec![
                "verify",
                "--identity",
                "toeplitz-comp",
                "--lambda-re",
                "0.5",
                "--symbol",
                s(&em1),
                "--sizes",
                "4",
            ],
            0,
        ),
        (
            vec![
                "verify",
                "--identity",
                "unitary",
                "--lambda-re",
                "0",
                "--lambda-im",
                "1",
                "--symbol",
                s(&em1),
                "--sizes",
                "16",
            ],
            0,
        ),
        (
            vec![
                "verify",
                "--identity",
                "unitary",
                "--lambda-re",
                "0.5",
                "--symbol",
                s(&em1),
                "--sizes",
                "4",
            ],
            2,
        ),
        (
            vec![
                "build",
                "--lambda-re",
                "1.2",
                "--symbol",
                s(&e2),
                "--sizes",
                "4",
            ],
            2,
        ),
        (
            vec![
                "build",
                "--lambda-re",
                "0.8",
                "--lambda-im",
                "0.8",
                "--symbol",
                s(&e2),
                "--sizes",
                "4",
            ],
            2,
        ),
        (vec!["build", "--symbol", s(&bad), "--sizes", "4"], 2),
        (vec!["build", "--symbol", s(&dup), "--sizes", "4"], 2),
        (vec!["build", "--symbol", s(&missing), "--sizes", "4"], 2),
        (vec!["build", "--symbol", s(&e2)], 2),
        (vec!["build", "--symbol", s(&e2), "--sizes", "4,8"], 2),
        (vec!["svd", "--symbol", s(&e2), "--sizes", "8,4"], 2),
        (vec!["svd", "--symbol", s(&e2), "--sizes", "0,4"], 2),
        (
            vec!["svd", "--symbol", s(&e2), "--sizes", "4", "--rank-tol", "0"],
            2,
        ),
        (
            vec![
                "hsnorm",
                "--lambda-re",
                "1",
                "--symbol",
                s(&e2),
                "--sizes",
                "4",
            ],
            2,
        ),
        (
            vec![
                "hsnorm",
                "--lambda-re",
                "0.5",
                "--symbol",
                s(&e2),
                "--sizes",
                "4",
                "--tol",
                "-1",
            ],
            2,
        ),
        (
            vec![
                "norms",
                "--lambda-re",
                "0.5",
                "--symbol",
                s(&e2),
                "--sizes",
                "4",
            ],
            2,
        ),
        (
            vec![
                "spectrum",
                "--lambda-re",
                "0.5",
                "--symbol",
                s(&em1),
                "--sizes",
                "4",
            ],
            2,
        ),
        (
            vec![
                "verify",
                "--identity",
                "nope",
                "--symbol",
                s(&e2),
                "--sizes",
                "4",
            ],
            2,
        ),
        (vec!["frobnicate"], 2),
    ];
    for (args, expected) in cases {
        let out = run(&args);
        assert_eq!(
            code(&out),
            expected,
            "{args:?}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn malformed_symbol_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        "{\"coefficients\": [\n  {\"n\": 1, \"re\": }\n]}",
    );
    let out = run(&["svd", "--symbol", s(&bad), "--sizes", "4"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column"), "{err}");
}

#[test]
fn memory_budget_caps_dense_sections() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "e1.json", &[(1, 1.0, 0.0)]);
    let args = [
        "build",
        "--lambda-re",
        "0.5",
        "--symbol",
        s(&sym),
        "--sizes",
        "1024",
    ];
    let out = lt()
        .args(args)
        .env("LT_MEM_BUDGET_MB", "8")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    let out = lt()
        .args(args)
        .env("LT_MEM_BUDGET_MB", "16")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(
        dir.path(),
        "phi.json",
        &[
            (-3, 0.2, 0.7),
            (0, 1.0, -1.0),
            (1, 0.5, 0.5),
            (4, -0.3, 0.0),
        ],
    );
    let commands: [&[&str]; 4] = [
        &[
            "svd",
            "--lambda-re",
            "0.3",
            "--lambda-im",
            "0.6",
            "--sizes",
            "16,48",
        ],
        &["hsnorm", "--lambda-re", "-0.7", "--sizes", "8,40"],
        &["build", "--lambda-im", "1", "--sizes", "12"],
        &["apply", "--lambda-re", "0.6", "--sizes", "100"],
    ];
    for (i, cmd) in commands.iter().enumerate() {
        for format in ["json", "csv"] {
            let mut bodies = Vec::new();
            for run_no in 0..2 {
                let path = dir.path().join(format!("out-{i}-{run_no}.{format}"));
                let mut args = cmd.to_vec();
                args.extend(["--symbol", s(&sym), "--format", format, "--out", s(&path)]);
                let out = run(&args);
                assert_eq!(code(&out), 0, "{args:?}");
                bodies.push((out.stdout, std::fs::read(&path).unwrap()));
            }
            assert_eq!(bodies[0], bodies[1], "{cmd:?} {format}");
        }
    }
}

#[test]
fn svd_json_has_report_fields_with_sorted_keys() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "phi.json", &[(-1, 1.0, 0.0), (1, 1.0, 0.0)]);
    let path = dir.path().join("r.json");
    let out = run(&[
        "svd",
        "--lambda-re",
        "0.5",
        "--symbol",
        s(&sym),
        "--sizes",
        "8,16",
        "--format",
        "json",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let keys = [
        "\"N\"",
        "\"decay_margins\"",
        "\"frobenius_norm\"",
        "\"numerical_rank\"",
        "\"operator_norm\"",
        "\"singular_values\"",
        "\"trace_norm\"",
    ];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).expect(k)).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{text}");
    let json: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
    assert_eq!(json[1]["singular_values"].as_array().unwrap().len(), 16);
    // 17 significant digits.
    assert!(text.contains("e-1") || text.contains("e0"));
    let sigma = json[0]["operator_norm"].as_f64().unwrap();
    let digits = text.split("\"operator_norm\":").nth(1).unwrap();
    assert!(digits.starts_with(&format!("{sigma:.16e}")));
}

#[test]
fn csv_singular_values_layout() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(dir.path(), "e0.json", &[(0, 2.0, 0.0)]);
    let one = dir.path().join("one.csv");
    let many = dir.path().join("many.csv");
    assert_eq!(
        code(&run(&[
            "svd",
            "--lambda-re",
            "0.5",
            "--symbol",
            s(&sym),
            "--sizes",
            "3",
            "--out",
            s(&one)
        ])),
        0
    );
    assert_eq!(
        std::fs::read_to_string(&one).unwrap(),
        "k,sigma_k\n1,2.0000000000000000e0\n2,1.0000000000000000e0\n3,5.0000000000000000e-1\n"
    );
    assert_eq!(
        code(&run(&[
            "svd",
            "--lambda-re",
            "0.5",
            "--symbol",
            s(&sym),
            "--sizes",
            "2,3",
            "--out",
            s(&many)
        ])),
        0
    );
    let text = std::fs::read_to_string(&many).unwrap();
    assert!(text.starts_with("N,k,sigma_k\n2,1,2.0"));
    assert_eq!(text.lines().count(), 1 + 2 + 3);
}

#[test]
fn apply_methods_agree_and_read_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(
        dir.path(),
        "phi.json",
        &[(-2, 1.0, 0.5), (0, -1.0, 0.0), (3, 0.0, 2.0)],
    );
    let x = write(
        dir.path(),
        "x.csv",
        "k,re,im\n0,1,0\n1,0,1\n2,-1,0.5\n3,0.25,0\n4,0,0\n5,2,-2\n",
    );
    let mut results = Vec::new();
    for method in ["fast", "naive"] {
        let path = dir.path().join(format!("{method}.json"));
        let out = run(&[
            "apply",
            "--lambda-re",
            "0.3",
            "--lambda-im",
            "0.7",
            "--symbol",
            s(&sym),
            "--vector",
            s(&x),
            "--method",
            method,
            "--format",
            "json",
            "--out",
            s(&path),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let json: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let re: Vec<f64> = json["re"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let im: Vec<f64> = json["im"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        results.push((re, im));
    }
    assert_eq!(results[0].0.len(), 6);
    for k in 0..6 {
        assert!((results[0].0[k] - results[1].0[k]).abs() < 1e-12);
        assert!((results[0].1[k] - results[1].1[k]).abs() < 1e-12);
    }
    let out = run(&[
        "apply",
        "--symbol",
        s(&sym),
        "--vector",
        s(&x),
        "--sizes",
        "5",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_recurrence_reproduces_section_and_accepts_rhs() {
    let dir = tempfile::tempdir().unwrap();
    let sym = symbol_file(
        dir.path(),
        "phi.json",
        &[(-1, 1.0, 0.0), (0, 0.5, 0.2), (2, -1.0, 1.0)],
    );
    let solved = dir.path().join("a.csv");
    let direct = dir.path().join("t.csv");
    let base = [
        "--lambda-re",
        "0.2",
        "--lambda-im",
        "-0.9",
        "--symbol",
        s(&sym),
        "--sizes",
        "6",
    ];
    let mut args = vec!["solve-recurrence"];
    args.extend(base);
    args.extend(["--out", s(&solved)]);
    assert_eq!(code(&run(&args)), 0);
    let mut args = vec!["build"];
    args.extend(base);
    args.extend(["--out", s(&direct)]);
    assert_eq!(code(&run(&args)), 0);
    let parse = |p: &Path| -> Vec<f64> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .flat_map(|l| {
                l.split(',')
                    .skip(2)
                    .map(|v| v.parse::<f64>().unwrap())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let (a, t) = (parse(&solved), parse(&direct));
    assert!(a.iter().zip(&t).all(|(x, y)| (x - y).abs() < 1e-13));

    // A constant B adds (1 + λ + … + λ^{k-1}) along the k-th step of each diagonal.
    let rhs = write(dir.path(), "b.csv", "n,m,re,im\n0,0,1,0\n");
    let with_rhs = dir.path().join("ab.csv");
    let mut args = vec!["solve-recurrence"];
    args.extend(base);
    args.extend(["--rhs", s(&rhs), "--out", s(&with_rhs)]);
    assert_eq!(code(&run(&args)), 0);
    let ab = parse(&with_rhs);
    // Entry (1,1) is the fourth-to-last value pair of row 1: index (1*6+1)*2.
    let idx = (6 + 1) * 2;
    assert!((ab[idx] - (t[idx] + 1.0)).abs() < 1e-13);
}

#[test]
fn spectrum_and_norms_report() {
    let dir = tempfile::tempdir().unwrap();
    let psi = symbol_file(dir.path(), "psi.json", &[(0, 2.0, 0.0), (1, 1.0, 1.0)]);
    let path = dir.path().join("s.json");
    let out = run(&[
        "spectrum",
        "--lambda-re",
        "0.5",
        "--symbol",
        s(&psi),
        "--sizes",
        "16",
        "--format",
        "json",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json[0]["pairwise_distinct"], true);
    assert_eq!(json[0]["eigenvalues"][3]["re"].as_f64(), Some(0.25));

    let bump = symbol_file(
        dir.path(),
        "bump.json",
        &[(-1, 1.0, 0.0), (0, 2.0, 0.0), (1, 1.0, 0.0)],
    );
    let path = dir.path().join("n.json");
    let out = run(&[
        "norms",
        "--lambda-re",
        "1",
        "--symbol",
        s(&bump),
        "--sizes",
        "16,64",
        "--format",
        "json",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let n16 = json["norms"][0]["operator_norm"].as_f64().unwrap();
    let n64 = json["norms"][1]["operator_norm"].as_f64().unwrap();
    let sup = json["sup_norm_estimate"].as_f64().unwrap();
    assert!(n16 < n64 && n64 <= sup + 1e-12);
    assert!((sup - 4.0).abs() < 1e-12);
}

#[test]
fn sawtooth_demo_exit_status_follows_reported_growth() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("saw.json");
    let out = run(&["sawtooth-demo", "--format", "json", "--out", s(&path)]);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let growth = json["growth"].as_f64().unwrap();
    assert_eq!(json["norms"][0]["N"], 64);
    assert_eq!(json["norms"][1]["N"], 1024);
    assert!(growth > 1.0, "norms must grow, got {growth}");
    assert_eq!(json["pass"].as_bool().unwrap(), growth > 1.5);
    assert_eq!(code(&out), if growth > 1.5 { 0 } else { 1 });
    assert_eq!(code(&run(&["sawtooth-demo", "--sizes", "64"])), 2);
}
