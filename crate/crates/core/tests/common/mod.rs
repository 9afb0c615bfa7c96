#![allow(dead_code)]

use etl_core::{Comparison, Formula, ScoredTrace, Valuation};
use rand::Rng;

pub const ATOMS: [&str; 3] = ["p", "q", "r"];
pub const SENTINEL: f64 = 1e18;

/// Random formula over `ATOMS` with nesting depth at most `depth`.
pub fn formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            n => Formula::pred(ATOMS[n % 3]),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..7) {
        0 => Formula::not(formula(rng, d)),
        1 => Formula::and(formula(rng, d), formula(rng, d)),
        2 => Formula::or(formula(rng, d), formula(rng, d)),
        3 => Formula::until(formula(rng, d), formula(rng, d)),
        4 => Formula::eventually(formula(rng, d)),
        5 => Formula::always(formula(rng, d)),
        _ => Formula::pred(ATOMS[rng.random_range(0..3)]),
    }
}

/// Random formula without temporal operators: its value at a step ignores the horizon.
pub fn state_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        return match rng.random_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            n => Formula::pred(ATOMS[n % 3]),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..3) {
        0 => Formula::not(state_formula(rng, d)),
        1 => Formula::and(state_formula(rng, d), state_formula(rng, d)),
        _ => Formula::or(state_formula(rng, d), state_formula(rng, d)),
    }
}

/// Scores on a coarse grid so that ties and zero robustness occur often.
pub fn scored<R: Rng>(rng: &mut R, len: usize) -> ScoredTrace {
    let cmps = [Comparison::Le, Comparison::Lt, Comparison::Ge, Comparison::Gt];
    let eps: Vec<f64> = ATOMS.iter().map(|_| rng.random_range(0..=8) as f64 / 8.0).collect();
    let meta: Vec<(&str, f64, Comparison)> = ATOMS
        .iter()
        .zip(&eps)
        .map(|(a, e)| (*a, *e, cmps[rng.random_range(0..4)]))
        .collect();
    let cols: Vec<Vec<f64>> = ATOMS
        .iter()
        .map(|_| (0..len).map(|_| rng.random_range(0..=8) as f64 / 8.0).collect())
        .collect();
    ScoredTrace::from_scores(&meta, &cols).unwrap()
}

fn clamp(x: f64) -> f64 {
    x.clamp(-SENTINEL, SENTINEL)
}

/// Direct transcription of the quantitative semantics over the surface syntax.
pub fn rho(f: &Formula, v: &ScoredTrace, i: usize, k: usize) -> f64 {
    let r = match f {
        Formula::True => SENTINEL,
        Formula::False => -SENTINEL,
        Formula::Pred(a) => v.robustness(v.atom_index(a).unwrap(), i),
        Formula::Not(g) => -rho(g, v, i, k),
        Formula::And(a, b) => rho(a, v, i, k).min(rho(b, v, i, k)),
        Formula::Or(a, b) => rho(a, v, i, k).max(rho(b, v, i, k)),
        Formula::Until(a, b) => {
            let mut best = f64::NEG_INFINITY;
            for j in i..=k {
                let mut inf = SENTINEL;
                for l in i..j {
                    inf = inf.min(rho(a, v, l, k));
                }
                best = best.max(rho(b, v, j, k).min(inf));
            }
            best
        }
        Formula::Eventually(g) => (i..=k).map(|j| rho(g, v, j, k)).fold(f64::NEG_INFINITY, f64::max),
        Formula::Always(g) => (i..=k).map(|j| rho(g, v, j, k)).fold(f64::INFINITY, f64::min),
    };
    clamp(r)
}

/// Boolean finite-trace semantics over the surface syntax.
pub fn holds(f: &Formula, v: &ScoredTrace, i: usize, k: usize) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Pred(a) => v.holds(v.atom_index(a).unwrap(), i),
        Formula::Not(g) => !holds(g, v, i, k),
        Formula::And(a, b) => holds(a, v, i, k) && holds(b, v, i, k),
        Formula::Or(a, b) => holds(a, v, i, k) || holds(b, v, i, k),
        Formula::Until(a, b) => (i..=k).any(|j| holds(b, v, j, k) && (i..j).all(|l| holds(a, v, l, k))),
        Formula::Eventually(g) => (i..=k).any(|j| holds(g, v, j, k)),
        Formula::Always(g) => (i..=k).all(|j| holds(g, v, j, k)),
    }
}
