use partsel_core::recursive::{self, Branch};
use partsel_core::{compute_n1, compute_n2, OptPrimitive, PrivacyParams};
use proptest::prelude::*;

const EPSILONS: [f64; 6] = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0];
const DELTAS: [f64; 4] = [1e-12, 1e-10, 1e-5, 1e-2];

/// `(eps, delta, n1, n2)` from a 50-digit mpmath walk of the recurrence.
const CROSSOVERS: [(f64, f64, u64, u64); 24] = [
    (0.01, 1e-12, 2234, 4467),
    (0.01, 1e-10, 1773, 3546),
    (0.01, 1e-5, 622, 1244),
    (0.01, 1e-2, 41, 81),
    (0.1, 1e-12, 247, 493),
    (0.1, 1e-10, 201, 401),
    (0.1, 1e-5, 86, 171),
    (0.1, 1e-2, 18, 36),
    (0.5, 1e-12, 53, 106),
    (0.5, 1e-10, 44, 87),
    (0.5, 1e-5, 21, 41),
    (0.5, 1e-2, 7, 14),
    (1.0, 1e-12, 27, 54),
    (1.0, 1e-10, 23, 45),
    (1.0, 1e-5, 11, 22),
    (1.0, 1e-2, 4, 8),
    (2.0, 1e-12, 14, 28),
    (2.0, 1e-10, 12, 24),
    (2.0, 1e-5, 6, 12),
    (2.0, 1e-2, 3, 5),
    (5.0, 1e-12, 6, 12),
    (5.0, 1e-10, 5, 10),
    (5.0, 1e-5, 3, 6),
    (5.0, 1e-2, 1, 2),
];

fn params(eps: f64, delta: f64) -> PrivacyParams {
    PrivacyParams::add_remove(eps, delta).unwrap()
}

#[test]
fn crossovers_match_high_precision_walk() {
    for (eps, delta, n1, n2) in CROSSOVERS {
        let p = params(eps, delta);
        let prim = OptPrimitive::new(p);
        assert_eq!(compute_n1(&p).unwrap(), n1, "n1 at ({eps}, {delta})");
        assert_eq!(prim.n2(), Some(n2), "n2 at ({eps}, {delta})");
        assert_eq!(
            compute_n2(&p, n1, prim.pi_n1().unwrap()).unwrap(),
            n2,
            "compute_n2 at ({eps}, {delta})"
        );
    }
}

#[test]
fn crossovers_match_float_recursion_indices() {
    for eps in EPSILONS {
        for delta in DELTAS {
            let p = params(eps, delta);
            let prim = OptPrimitive::new(p);
            let n2 = prim.n2().unwrap();
            let t = recursive::trace(&p, n2 + 5).unwrap();
            assert_eq!(Some(t.growth_end()), prim.n1(), "({eps}, {delta})");
            assert_eq!(t.saturation_index(), Some(n2 + 1), "({eps}, {delta})");
            assert_eq!(t.branches[n2 as usize], Branch::Saturated);
        }
    }
}

#[test]
fn closed_form_matches_recursion_on_grid() {
    for eps in EPSILONS {
        for delta in DELTAS {
            let p = params(eps, delta);
            let prim = OptPrimitive::new(p);
            let n_max = prim.n2().unwrap() + 5;
            let t = recursive::trace(&p, n_max).unwrap();
            for n in 0..=n_max {
                let diff = (prim.prob(n) - t.values[n as usize]).abs();
                assert!(diff <= 1e-9, "({eps}, {delta}) n={n} diff={diff}");
            }
        }
    }
}

#[test]
fn dp_inequalities_tightness_and_steps() {
    for eps in EPSILONS {
        for delta in DELTAS {
            let prim = OptPrimitive::new(params(eps, delta));
            let n2 = prim.n2().unwrap();
            let e = eps.exp();
            for n in 0..=n2 + 5 {
                let a = prim.prob(n);
                let b = prim.prob(n + 1);
                assert!(e * a + delta - b >= -1e-12);
                assert!(e * b + delta - a >= -1e-12);
                assert!(e * (1.0 - a) + delta - (1.0 - b) >= -1e-12);
                assert!(e * (1.0 - b) + delta - (1.0 - a) >= -1e-12);
                assert!(b >= a);
                if n <= n2 {
                    let best = (e * a + delta).min(1.0 - (1.0 - a - delta) / e).min(1.0);
                    assert!((b - best).abs() <= 1e-9, "tightness ({eps}, {delta}) n={n}");
                }
                if n >= 1 && n <= n2 {
                    assert!(a - prim.prob(n - 1) >= delta / e - 1e-12);
                }
                if n > n2 {
                    assert_eq!(a, 1.0);
                }
            }
        }
    }
}

#[test]
fn degenerate_budgets() {
    let zero = OptPrimitive::new(params(1.0, 0.0));
    assert!((0..1000).all(|n| zero.prob(n) == 0.0));
    let zero = OptPrimitive::new(params(0.0, 0.0));
    assert!((0..1000).all(|n| zero.prob(n) == 0.0));
    for delta in [0.1, 0.03, 1e-3] {
        let lin = OptPrimitive::new(params(0.0, delta));
        for n in 0..2000u64 {
            assert_eq!(lin.prob(n), (n as f64 * delta).min(1.0));
        }
    }
}

#[test]
fn tiny_budgets_stay_constant_time() {
    let prim = OptPrimitive::new(params(1e-6, 1e-12));
    let n1 = prim.n1().unwrap();
    let n2 = prim.n2().unwrap();
    assert!(n1 > 10_000_000 && n2 > n1);
    assert!(prim.prob(n1) > 0.0 && prim.prob(n1) < 1.0);
    assert_eq!(prim.prob(n2 + 1), 1.0);
    assert!(recursive::pi_opt_recursive(&params(1e-6, 1e-12), n2).is_err());
}

proptest! {
    #[test]
    fn monotone_and_bounded(eps in 0.001f64..8.0, log_delta in -14.0f64..-0.01, n in 0u64..5000) {
        let delta = 10f64.powf(log_delta);
        let prim = OptPrimitive::new(params(eps, delta));
        let a = prim.prob(n);
        let b = prim.prob(n + 1);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
        let e = eps.exp();
        prop_assert!(b <= e * a + delta + 1e-12);
        prop_assert!(1.0 - a <= e * (1.0 - b) + delta + 1e-12);
    }

    #[test]
    fn closed_form_agrees_with_recursion(eps in 0.05f64..5.0, log_delta in -12.0f64..-1.0) {
        let p = params(eps, 10f64.powf(log_delta));
        let prim = OptPrimitive::new(p);
        let n_max = prim.n2().unwrap() + 3;
        let t = recursive::trace(&p, n_max).unwrap();
        for n in 0..=n_max {
            prop_assert!((prim.prob(n) - t.values[n as usize]).abs() <= 1e-9);
        }
    }
}
