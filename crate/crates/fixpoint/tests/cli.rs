use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fixpoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixpoint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn certify_example7_is_refused() {
    let o = fixpoint(&["certify", path(&fixture("example7.mtx"))]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("verdict: not_contractive"), "{out}");
    assert!(out.contains("determinant_diagnostic: 0.5\n"), "{out}");
    assert!(out.contains("norm infinity: 1.5\n"), "{out}");
}

#[test]
fn certify_json_schema() {
    let o = fixpoint(&["certify", "--matrix", path(&fixture("example7.mtx")), "--output", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let doc = fixpoint::report::read_certificate_json(&stdout(&o)).unwrap();
    assert_eq!(doc.schema_version, "1");
    assert_eq!(doc.verdict, "not_contractive");
    assert_eq!(doc.norms.len(), 3);
    assert_eq!(doc.problem.nnz, 6);
    assert!(doc.solve.is_none());
}

#[test]
fn certify_norm_selection() {
    let m = fixture("tridiag.mtx");
    let o = fixpoint(&["certify", path(&m), "--norm", "fro", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = fixpoint::report::read_certificate_json(&stdout(&o)).unwrap();
    assert_eq!(doc.norms.keys().collect::<Vec<_>>(), vec!["frobenius"]);
}

#[test]
fn jacobi_solves_diagonal_in_one_step() {
    let o = fixpoint(&[
        "solve",
        "--matrix",
        path(&fixture("diag.mtx")),
        "--rhs",
        path(&fixture("diag_rhs.txt")),
        "--precondition",
        "jacobi",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("iterations: 1\n"), "{out}");
    assert!(out.contains("solution:\n0.5\n-0.5\n6.0\n0.5\n"), "{out}");
}

#[test]
fn solve_writes_trace_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = fixpoint(&[
        "solve",
        "--matrix",
        path(&fixture("tridiag.mtx")),
        "--rhs",
        path(&fixture("tridiag_rhs.txt")),
        "--verify",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("status: converged"));
    assert!(out.contains("within_a_posteriori_bound: true"), "{out}");
    let csv = std::fs::read_to_string(trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,step_distance,step_ratio"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("1,") && first.ends_with(','), "{first}");
    for line in lines {
        let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(ratio <= 0.4 + 1e-12, "{line}");
    }
}

#[test]
fn solve_example7_refused_with_oracle() {
    let o = fixpoint(&[
        "solve",
        "--matrix",
        path(&fixture("example7.mtx")),
        "--rhs",
        path(&fixture("example7_rhs.txt")),
        "--verify",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not contractive"));
    let out = stdout(&o);
    let oracle: Vec<f64> = out
        .split("  solution:\n")
        .nth(1)
        .unwrap()
        .lines()
        .take(3)
        .map(|l| l.trim().parse().unwrap())
        .collect();
    for (x, want) in oracle.iter().zip([10.0 / 3.0, -3.0, 6.0]) {
        assert!((x - want).abs() <= 1e-10, "{x} vs {want}");
    }
    assert!(out.contains("  residual: 0.0\n"), "{out}");
}

#[test]
fn forced_example7_diverges() {
    let o = fixpoint(&[
        "solve",
        "--matrix",
        path(&fixture("example7.mtx")),
        "--rhs",
        path(&fixture("example7_rhs.txt")),
        "--force",
        "--output",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let doc = fixpoint::report::read_certificate_json(&stdout(&o)).unwrap();
    assert_eq!(doc.solve.unwrap().status, "divergence_detected");
}

#[test]
fn budget_exhaustion_exits_two() {
    let o = fixpoint(&[
        "solve",
        "--matrix",
        path(&fixture("tridiag.mtx")),
        "--rhs",
        path(&fixture("tridiag_rhs.txt")),
        "--max-iter",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("status: max_iterations_reached"));
}

#[test]
fn fredholm_separable_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let o = fixpoint(&[
        "fredholm",
        "--kernel",
        "separable-xy",
        "--u",
        "1",
        "--nodes",
        "64",
        "--g",
        "linear",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = std::fs::read_to_string(csv).unwrap();
    assert!(stdout(&o).ends_with(&table));
    let rows: Vec<(f64, f64)> = table
        .lines()
        .skip(1)
        .map(|l| {
            let (x, f) = l.split_once(',').unwrap();
            (x.parse().unwrap(), f.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 64);
    for (x, f) in rows {
        assert!((f - 1.5 * x).abs() <= 1e-6);
    }
}

#[test]
fn fredholm_json_and_refusal() {
    let o = fixpoint(&["fredholm", "--kernel", "constant", "--u", "0.5", "--g", "constant", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: fixpoint::report::FredholmDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.verdict, "contractive");
    // f = 1 + 0.5 * ∫ f  =>  f = 2.
    assert_eq!(doc.solve.unwrap().status, "converged");

    let o = fixpoint(&["fredholm", "--kernel", "separable-xy", "--u", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("verdict: not_contractive"));
}

#[test]
fn scalar_paths() {
    let o = fixpoint(&["scalar", "--f", "cos(x)", "--a", "0", "--b", "1", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: fixpoint::report::ScalarDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((doc.fixed_point.unwrap() - 0.739_085_133_215_160_6).abs() <= 1e-9);

    let o = fixpoint(&["scalar", "--f", "x + 1", "--a", "0", "--b", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("leaves the interval"), "{}", stderr(&o));
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mtx");
    std::fs::write(&bad, "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n").unwrap();
    let o = fixpoint(&["certify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = fixpoint(&["certify", dir.path().join("missing.mtx").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let rhs = dir.path().join("b.txt");
    std::fs::write(&rhs, "1\n2\n").unwrap();
    let o = fixpoint(&["solve", "--matrix", path(&fixture("example7.mtx")), "--rhs", rhs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let rect = dir.path().join("rect.mtx");
    std::fs::write(&rect, "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 3 1\n").unwrap();
    assert_eq!(fixpoint(&["certify", rect.to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(fixpoint(&["solve", "--matrix", "x.mtx"]).status.code(), Some(1));
    assert_eq!(fixpoint(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(fixpoint(&["--help"]).status.code(), Some(0));
}
