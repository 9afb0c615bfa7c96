mod common;

use common::{formula, holds, rho, scored, state_formula};
use etl_core::semantics::{robustness, sat_bounded};
use etl_core::{Formula, Valuation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn robustness_matches_direct_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3000 {
        let f = formula(&mut rng, 3);
        let len = rng.random_range(1..=12);
        let v = scored(&mut rng, len);
        let k = rng.random_range(0..len);
        let i = rng.random_range(0..=k);
        assert_eq!(robustness(&f, &v, i, k).unwrap(), rho(&f, &v, i, k), "{f} at ({i},{k})");
    }
}

#[test]
fn sat_matches_direct_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..3000 {
        let f = formula(&mut rng, 3);
        let len = rng.random_range(1..=12);
        let v = scored(&mut rng, len);
        let k = rng.random_range(0..len);
        let i = rng.random_range(0..=k);
        assert_eq!(sat_bounded(&f, &v, i, k).unwrap(), holds(&f, &v, i, k), "{f} at ({i},{k})");
    }
}

#[test]
fn desugaring_preserves_meaning() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let f = formula(&mut rng, 4);
        let core = f.desugar();
        assert!(core.is_core());
        let len = rng.random_range(1..=10);
        let v = scored(&mut rng, len);
        let k = len - 1;
        let i = rng.random_range(0..len);
        assert_eq!(robustness(&f, &v, i, k).unwrap(), robustness(&core, &v, i, k).unwrap());
        assert_eq!(sat_bounded(&f, &v, i, k).unwrap(), sat_bounded(&core, &v, i, k).unwrap());
    }
}

#[test]
fn sign_agrees_with_satisfaction() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3000 {
        let f = formula(&mut rng, 4);
        let len = rng.random_range(1..=10);
        let v = scored(&mut rng, len);
        let k = rng.random_range(0..len);
        let r = robustness(&f, &v, 0, k).unwrap();
        let s = sat_bounded(&f, &v, 0, k).unwrap();
        if r > 0.0 {
            assert!(s, "{f}: rho {r} but unsatisfied");
        }
        if r < 0.0 {
            assert!(!s, "{f}: rho {r} but satisfied");
        }
    }
}

#[test]
fn duality_and_horizon_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let phi = state_formula(&mut rng, 3);
        let len = rng.random_range(1..=16);
        let v = scored(&mut rng, len);
        let i = rng.random_range(0..len);
        let ev = Formula::eventually(phi.clone());
        let al = Formula::always(phi.clone());
        let mut prev: Option<(f64, f64)> = None;
        for k in i..len {
            let f = robustness(&ev, &v, i, k).unwrap();
            let g_not = robustness(&Formula::always(Formula::not(phi.clone())), &v, i, k).unwrap();
            assert_eq!(f, -g_not);
            let g = robustness(&al, &v, i, k).unwrap();
            if let Some((pf, pg)) = prev {
                assert!(f >= pf && g <= pg);
            }
            prev = Some((f, g));
        }
    }
}

#[test]
fn duality_on_temporal_operands() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let phi = formula(&mut rng, 3);
        let len = rng.random_range(1..=12);
        let v = scored(&mut rng, len);
        let k = rng.random_range(0..len);
        let i = rng.random_range(0..=k);
        assert_eq!(
            robustness(&Formula::eventually(phi.clone()), &v, i, k).unwrap(),
            -robustness(&Formula::always(Formula::not(phi)), &v, i, k).unwrap()
        );
    }
}

#[test]
fn until_reduces_to_eventually_and_always() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let phi = formula(&mut rng, 2);
        let len = rng.random_range(1..=10);
        let v = scored(&mut rng, len);
        let k = len - 1;
        assert_eq!(
            robustness(&Formula::until(Formula::True, phi.clone()), &v, 0, k).unwrap(),
            robustness(&Formula::eventually(phi.clone()), &v, 0, k).unwrap()
        );
        assert_eq!(
            robustness(&Formula::not(Formula::until(Formula::True, Formula::not(phi.clone()))), &v, 0, k).unwrap(),
            robustness(&Formula::always(phi), &v, 0, k).unwrap()
        );
    }
}

#[test]
fn out_of_range_indices_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v = scored(&mut rng, 4);
    let f = Formula::pred("p");
    assert!(robustness(&f, &v, 0, 4).is_err());
    assert!(robustness(&f, &v, 3, 2).is_err());
    assert!(robustness(&Formula::pred("zzz"), &v, 0, 0).is_err());
    assert_eq!(v.len(), 4);
}

proptest! {
    #[test]
    fn robustness_bounded_by_sentinel(seed in any::<u64>(), len in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = formula(&mut rng, 4);
        let v = scored(&mut rng, len);
        let r = robustness(&f, &v, 0, len - 1).unwrap();
        prop_assert!(r.abs() <= 1e18);
        prop_assert_eq!(robustness(&Formula::not(f), &v, 0, len - 1).unwrap(), -r);
    }
}
