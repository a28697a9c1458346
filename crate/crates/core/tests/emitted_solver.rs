//! Builds the emitted standalone solver with `rustc` and compares its output
//! with the in-process integrator.

use std::path::PathBuf;
use std::process::Command;

use hamgen::lowering::emit_source;
use hamgen::prelude::*;

fn rustc() -> String {
    std::env::var("RUSTC").unwrap_or_else(|_| "rustc".to_string())
}

fn build(kernel: &SolverKernel, dir: &std::path::Path) -> PathBuf {
    let src = dir.join("solver.rs");
    std::fs::write(&src, emit_source(kernel, "rust").unwrap()).unwrap();
    let bin = dir.join("solver");
    let status = Command::new(rustc())
        .args(["-O", "--edition", "2021", "-o"])
        .arg(&bin)
        .arg(&src)
        .status()
        .expect("rustc runs");
    assert!(status.success(), "emitted source failed to compile");
    bin
}

fn run(bin: &PathBuf, args: &[&str]) -> Vec<Vec<f64>> {
    let out = Command::new(bin).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn beam_solver_matches_integrator() {
    let model = ModelSpec::parse("beam", &["q"], &["p"], &[], "-q^2/2 + q^4/4").unwrap();
    let kernel = SolverKernel::build(&model, Order::EIGHT).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bin = build(&kernel, dir.path());

    for order in Order::ALL {
        let rows = run(
            &bin,
            &["steps=20", "every=1", "tau=0.1", &format!("order={order}"), "z=0.5,1.25"],
        );
        assert_eq!(rows.len(), 21);
        let cfg = IntegratorConfig::double(0.1, order);
        let reference = integrate(&kernel, &State::new(vec![0.5, 1.25]), 20, &cfg, 1).unwrap();
        for (row, rec) in rows.iter().zip(&reference.records) {
            assert!((row[0] - rec.t).abs() < 1e-12);
            assert!((row[1] - rec.z[0]).abs() < 1e-12, "order {order}");
            assert!((row[2] - rec.z[1]).abs() < 1e-12, "order {order}");
            assert!((row[3] - rec.energy).abs() < 1e-12);
        }
    }
}

#[test]
fn parameterised_two_dimensional_solver() {
    let model = ModelSpec::parse(
        "ring",
        &["x", "y"],
        &["px", "py"],
        &["a"],
        "a*(x^2 + y^2)/2 + (x^2 + y^2)^2/4 + sin(x)/10",
    )
    .unwrap();
    let kernel = SolverKernel::build(&model, Order::SIX).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bin = build(&kernel, dir.path());
    let rows = run(&bin, &["steps=50", "tau=0.05", "z=0.3,-0.2,0.1,0.4", "params=0.7"]);
    let cfg = IntegratorConfig::double(0.05, Order::SIX).with_params(vec![0.7]);
    let reference = integrate(&kernel, &State::new(vec![0.3, -0.2, 0.1, 0.4]), 50, &cfg, 50).unwrap();
    let last = &rows[rows.len() - 1];
    for (a, b) in last[1..5].iter().zip(&reference.records[1].z) {
        assert!((a - b).abs() < 1e-12);
    }
}
