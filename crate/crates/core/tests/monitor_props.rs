mod common;

use common::{formula, scored, state_formula, ATOMS};
use etl_core::monitor::monitor_offline;
use etl_core::{Formula, IncrementalMonitor, Valuation, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn incremental_matches_offline() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3000 {
        let f = formula(&mut rng, 4);
        let len = rng.random_range(1..=40);
        let v = scored(&mut rng, len);
        let inc = IncrementalMonitor::run(&f, &v).unwrap();
        let off = monitor_offline(&f, &v).unwrap();
        assert_eq!(inc, off, "{f}");
    }
}

#[test]
fn stepwise_feed_matches_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let f = formula(&mut rng, 4);
        let len = rng.random_range(1..=30);
        let v = scored(&mut rng, len);
        let mut m = IncrementalMonitor::new(&f);
        let idx: Vec<usize> = m.atoms().iter().map(|a| v.atom_index(a).unwrap()).collect();
        let off = monitor_offline(&f, &v).unwrap();
        for t in 0..len {
            let row: Vec<f64> = idx.iter().map(|&a| v.robustness(a, t)).collect();
            let out = m.step(&row);
            assert_eq!(out.t, t);
            assert_eq!(out.verdict, off.verdicts.0[t]);
            assert_eq!(out.robustness, off.robustness[t]);
        }
        assert_eq!(m.steps_seen(), len);
    }
}

#[test]
fn safety_violations_latch() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let f = Formula::always(state_formula(&mut rng, 2));
        let len = rng.random_range(1..=40);
        let v = scored(&mut rng, len);
        let run = IncrementalMonitor::run(&f, &v).unwrap();
        if let Some(t) = run.verdicts.first_alert() {
            assert!(run.verdicts.0[t..].iter().all(|v| *v == Verdict::Violated), "{f}");
        }
    }
}

#[test]
fn liveness_verdicts_nondecreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let f = Formula::eventually(state_formula(&mut rng, 2));
        let len = rng.random_range(1..=40);
        let v = scored(&mut rng, len);
        let signs = IncrementalMonitor::run(&f, &v).unwrap().verdicts.signs();
        assert!(signs.windows(2).all(|w| w[0] <= w[1]), "{f}: {signs:?}");
    }
}

#[test]
fn long_traces_stay_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let f = Formula::until(Formula::pred(ATOMS[0]), Formula::always(Formula::pred(ATOMS[1])));
        let v = scored(&mut rng, 300);
        assert_eq!(IncrementalMonitor::run(&f, &v).unwrap(), monitor_offline(&f, &v).unwrap());
    }
}
