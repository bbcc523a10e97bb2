//! Acceptance battery. Each test runs one advertised property of the toolkit
//! at its pinned tolerance and prints a single pass/fail line; together they
//! are the exit gate `weyl3 suite` exposes on the command line.

use std::time::Instant;

use weyl3::report::CheckResult;
use weyl3::suite::{self, Tolerances};

const SEED: u64 = 42;
const ORDER: usize = 3;

fn tolerances() -> Tolerances {
    Tolerances::default()
}

/// Print the criterion line and fail the test if any check failed.
fn gate(name: &str, checks: &[CheckResult]) {
    let ok = checks.iter().all(|c| c.pass);
    let worst = checks
        .iter()
        .max_by(|a, b| {
            (a.residual / a.tol.max(1e-300)).total_cmp(&(b.residual / b.tol.max(1e-300)))
        })
        .expect("at least one check");
    println!(
        "[{}] {name}: {} checks, worst `{}` residual {:.3e} (tol {:.1e})",
        if ok { "PASS" } else { "FAIL" },
        checks.len(),
        worst.name,
        worst.residual,
        worst.tol,
    );
    for c in checks {
        assert!(
            c.pass,
            "{name}: check `{}` failed with residual {:.6e} > tol {:.1e} at {:?}",
            c.name, c.residual, c.tol, c.worst_point
        );
    }
}

#[test]
fn flat_model_vanishes() {
    let started = Instant::now();
    let checks = suite::flat_model(SEED, &tolerances(), ORDER);
    let elapsed = started.elapsed();
    gate("flat model", &checks);
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "flat model took {elapsed:?}, budget 1 s"
    );
}

#[test]
fn canonical_families_battery() {
    let started = Instant::now();
    let outcome = suite::families_battery(SEED, &tolerances(), ORDER);
    let elapsed = started.elapsed();
    gate("canonical families battery", &outcome.checks);
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "battery took {elapsed:?}, budget 30 s"
    );
}

#[test]
fn dkp_einstein_weyl_equivalence() {
    let checks = suite::dkp_equivalence(SEED, &tolerances());
    gate("dKP / Einstein-Weyl equivalence", &checks);
}

#[test]
fn reduced_family_admits_weight_minus_half_vector() {
    let outcome = suite::typea_reduction(SEED, &tolerances(), ORDER);
    gate("reduction to the q = -1/2 row", &outcome.checks);
    assert!(
        outcome
            .notes
            .iter()
            .any(|n| n.contains("+2dxdy") || n.contains("+2 dx dy")),
        "the passing sign convention must be documented in the report notes"
    );
}

#[test]
fn coordinate_oracle_agreement() {
    let checks = suite::oracle_agreement(SEED, &tolerances(), ORDER);
    gate("finite-difference oracle agreement", &checks);
}

#[test]
fn gauge_invariance_of_einstein_weyl_tensor() {
    let checks = suite::gauge_invariance(SEED, &tolerances(), ORDER);
    gate("gauge invariance", &checks);
}

#[test]
fn skew_ricci_universal_constant() {
    let checks = suite::skew_ricci_constant(SEED, &tolerances(), ORDER);
    gate("skew Ricci proportional to d nu", &checks);
}

#[test]
fn exterior_calculus_identities() {
    let checks = suite::exterior_identities(SEED, &tolerances());
    gate("exterior calculus identities", &checks);
}

#[test]
fn cli_suite_passes_within_budget() {
    let started = Instant::now();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_weyl3"))
        .args(["suite", "--seed", "42"])
        .output()
        .expect("binary runs");
    let elapsed = started.elapsed();
    let ok = output.status.code() == Some(0) && elapsed.as_secs_f64() < 60.0;
    println!(
        "[{}] cli suite: exit {:?} in {:.1} s (budget 60 s)",
        if ok { "PASS" } else { "FAIL" },
        output.status.code(),
        elapsed.as_secs_f64()
    );
    assert_eq!(
        output.status.code(),
        Some(0),
        "suite stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(elapsed.as_secs_f64() < 60.0, "suite took {elapsed:?}");
}
