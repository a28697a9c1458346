//! End-to-end behaviour of the `hamgen` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hamgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamgen")).args(args).output().unwrap()
}

fn model(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(format!("{name}.model"))
        .to_string_lossy()
        .into_owned()
}

fn ok(args: &[&str]) -> String {
    let out = hamgen(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn tmp(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn run_schema_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmp(&dir, "beam.csv");
    ok(&[
        "run", "--model", &model("beam"), "--tau", "1/10", "--order", "8", "--n-steps", "161",
        "--initial-state", "1/2,5/4", "--record-every", "10", "--out", out.to_str().unwrap(),
    ]);
    let (header, rows) = table(&out);
    assert_eq!(header, ["step", "t", "q", "p", "energy", "energy_error", "iterations"]);
    // step 0, every tenth step, and the last one
    assert_eq!(rows.len(), 1 + 16 + 1);
    assert_eq!(rows.last().unwrap()[0], "161");
    for row in &rows {
        assert_eq!(row.len(), header.len());
        for cell in &row[1..6] {
            cell.parse::<f64>().unwrap();
        }
    }
    let q1: f64 = rows[0][2].parse().unwrap();
    assert_eq!(q1, 0.5);

    let (h, counts) = table(&dir.path().join("beam.histogram.csv"));
    assert_eq!(h, ["iterations", "steps"]);
    assert_eq!(counts.len(), 21);
    let total: u64 = counts.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 161);
}

#[test]
fn zero_steps_writes_the_initial_row_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmp(&dir, "z.csv");
    ok(&[
        "run", "--model", &model("anharmonic"), "--tau", "0.1", "--order", "4", "--n-steps", "0",
        "--initial-state", "0.54,0", "--params", "0.13", "--out", out.to_str().unwrap(),
    ]);
    let (_, rows) = table(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0");
}

#[test]
fn extended_cells_carry_thirty_six_digits() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmp(&dir, "x.csv");
    ok(&[
        "run", "--model", &model("beam"), "--tau", "1/10", "--n-steps", "1", "--initial-state", "1/2,5/4",
        "--precision", "extended", "--out", out.to_str().unwrap(),
    ]);
    let (_, rows) = table(&out);
    let q = &rows[1][2];
    let digits = q.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
    assert_eq!(digits, 36, "{q}");
}

#[test]
fn identical_command_lines_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = |name: &str| {
        let out = tmp(&dir, name);
        ok(&[
            "coupled", "--n", "2", "--seed", "5", "--tau", "1/20", "--order", "6", "--horizon", "2",
            "--out", out.to_str().unwrap(),
        ]);
        (std::fs::read(&out).unwrap(), std::fs::read(dir.path().join(name.replace(".csv", ".fit.csv"))).unwrap())
    };
    assert_eq!(bytes("a.csv"), bytes("b.csv"));

    let scan = |name: &str| {
        let out = tmp(&dir, name);
        ok(&[
            "scan-tau", "--model", &model("beam"), "--taus", "0.2,0.1", "--horizon", "4", "--initial-state",
            "0.5,1.25", "--out", out.to_str().unwrap(),
        ]);
        std::fs::read(&out).unwrap()
    };
    assert_eq!(scan("s1.csv"), scan("s2.csv"));
}

#[test]
fn scan_rows_follow_order_then_tau() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmp(&dir, "s.csv");
    ok(&[
        "scan-tau", "--model", &model("beam"), "--orders", "4,2", "--taus", "0.1", "--horizon", "2",
        "--initial-state", "0.5,1.25", "--out", out.to_str().unwrap(),
    ]);
    let (header, rows) = table(&out);
    assert_eq!(header, ["order", "tau", "steps", "max_energy_error", "exponent"]);
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["4", "2"]);
    // a single step size has nothing to compare against
    assert!(rows.iter().all(|r| r[4].is_empty()));
    assert_eq!(rows[0][2], "20");
}

#[test]
fn single_mode_coupled_matches_global_error() {
    // With one mode R = ±1, so the error norm is the anharmonic one.
    let dir = tempfile::tempdir().unwrap();
    let c = tmp(&dir, "c.csv");
    ok(&[
        "coupled", "--n", "1", "--seed", "3", "--tau", "1/10", "--order", "4", "--horizon", "3",
        "--out", c.to_str().unwrap(),
    ]);
    let (_, rows) = table(&c);
    assert_eq!(rows.len(), 31);
    let last: f64 = rows[30][2].parse().unwrap();
    assert!(last > 0.0 && last < 1e-4);
}

#[test]
fn global_error_writes_fit_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmp(&dir, "g.csv");
    ok(&[
        "global-error", "--alpha", "0.13", "--q0", "0.54", "--orders", "4", "--taus", "1/10,1/20",
        "--horizon", "2", "--out", out.to_str().unwrap(),
    ]);
    let (header, rows) = table(&out);
    assert_eq!(header, ["order", "tau", "t", "error"]);
    assert_eq!(rows.len(), 21 + 41);
    let (fh, fits) = table(&dir.path().join("g.fit.csv"));
    assert_eq!(fh, ["order", "tau", "c_n", "envelope_r2", "final_error"]);
    let c: Vec<f64> = fits.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((c[0] / c[1] - 1.0).abs() < 0.25, "{c:?}");
}

#[test]
fn generate_reports_and_emits() {
    let dir = tempfile::tempdir().unwrap();
    let src = tmp(&dir, "free.rs");
    let report = ok(&["generate", "--model", &model("free"), "--maxorder", "4", "--emit", "rust", "--out", src.to_str().unwrap()]);
    assert!(report.contains("maxorder 4"));
    // V = 0 leaves every correction a single zero node
    assert!(report.lines().any(|l| l.split_whitespace().eq(["G3", "1", "nodes"])), "{report}");
    assert!(std::fs::read_to_string(&src).unwrap().contains("fn main"));
}

fn fails_with(args: &[&str], needle: &str) {
    let out = hamgen(args);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(needle), "{err}");
}

#[test]
fn errors_are_one_line_and_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmp(&dir, "e.csv");
    let out = out.to_str().unwrap();
    fails_with(&["run", "--model", "/no/such.model", "--tau", "1", "--n-steps", "1", "--initial-state", "1,1", "--out", out], "such.model");
    fails_with(&["run", "--model", &model("beam"), "--tau", "1", "--n-steps", "1", "--initial-state", "1", "--out", out], "needs 2");
    fails_with(&["run", "--model", &model("beam"), "--tau", "1", "--order", "5", "--n-steps", "1", "--initial-state", "1,1", "--out", out], "order");
    fails_with(&["scan-tau", "--model", &model("beam"), "--taus", "-0.1", "--horizon", "1", "--initial-state", "1,1", "--out", out], "positive");
    fails_with(&["global-error", "--alpha", "-2", "--q0", "1", "--taus", "0.1", "--horizon", "1", "--out", out], "oracle");
    fails_with(&["run", "--model", &model("pendulum"), "--tau", "0.1", "--order", "4", "--n-steps", "1", "--initial-state", "0,0,0,0", "--out", out], "step 1");

    let out = hamgen(&["run", "--model", "/no/such.model", "--tau", "1", "--n-steps", "1", "--initial-state", "1,1", "--out", "x"]);
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}
