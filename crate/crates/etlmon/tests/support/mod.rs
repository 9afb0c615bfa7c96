#![allow(dead_code)]

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use etl_core::{Comparison, Formula, ScoredTrace};
use rand::Rng;

pub const ATOMS: [&str; 3] = ["p", "q", "r"];

pub fn etlmon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etlmon"))
        .args(args)
        .env_remove("ETLMON_THREADS")
        .output()
        .expect("binary runs")
}

pub fn etlmon_ok(args: &[&str]) -> String {
    let out = etlmon(args);
    assert!(
        out.status.success(),
        "etlmon {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes straight to the process stderr so the line survives test output capture.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "[acceptance {id}] {} {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

pub fn formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            n => Formula::pred(ATOMS[n % 3]),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..6) {
        0 => Formula::not(formula(rng, d)),
        1 => Formula::and(formula(rng, d), formula(rng, d)),
        2 => Formula::or(formula(rng, d), formula(rng, d)),
        3 => Formula::until(formula(rng, d), formula(rng, d)),
        4 => Formula::eventually(formula(rng, d)),
        _ => Formula::always(formula(rng, d)),
    }
}

pub fn state_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        return Formula::pred(ATOMS[rng.random_range(0..3)]);
    }
    let d = depth - 1;
    match rng.random_range(0..3) {
        0 => Formula::not(state_formula(rng, d)),
        1 => Formula::and(state_formula(rng, d), state_formula(rng, d)),
        _ => Formula::or(state_formula(rng, d), state_formula(rng, d)),
    }
}

/// Random scores for `ATOMS`, on a coarse grid half of the time so ties and zeros occur.
pub fn scores<R: Rng>(rng: &mut R, len: usize) -> Vec<Vec<f64>> {
    let grid = rng.random_bool(0.5);
    ATOMS
        .iter()
        .map(|_| {
            (0..len)
                .map(|_| if grid { rng.random_range(0..=8) as f64 / 8.0 } else { rng.random::<f64>() })
                .collect()
        })
        .collect()
}

pub fn scored_from(cols: &[Vec<f64>], eps: &[f64]) -> ScoredTrace {
    let meta: Vec<(&str, f64, Comparison)> =
        ATOMS.iter().zip(eps).map(|(a, e)| (*a, *e, Comparison::Le)).collect();
    ScoredTrace::from_scores(&meta, cols).unwrap()
}

pub fn scored<R: Rng>(rng: &mut R, len: usize) -> ScoredTrace {
    let eps: Vec<f64> = ATOMS.iter().map(|_| rng.random_range(0..=8) as f64 / 8.0).collect();
    scored_from(&scores(rng, len), &eps)
}
