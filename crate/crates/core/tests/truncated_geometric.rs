use partsel_core::{selection_prob_via_threshold, OptPrimitive, PrivacyParams, TsgdParams};
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(eps: f64, delta: f64) -> PrivacyParams {
    PrivacyParams::add_remove(eps, delta).unwrap()
}

/// The delta at which `(1/eps) ln((e^eps + 2 delta - 1) / ((e^eps + 1) delta))`
/// equals the integer `k`.
fn integral_delta(eps: f64, k: u64) -> f64 {
    eps.exp_m1() / ((k as f64 * eps).exp() * (eps.exp() + 1.0) - 2.0)
}

fn brute_tail(t: &TsgdParams, mu: i64, y: i64) -> f64 {
    let k = t.k() as i64;
    (-k..=k).filter(|x| mu + x >= y).map(|x| t.pmf(x)).sum()
}

#[test]
fn integral_k_configuration() {
    let delta = integral_delta(1.0, 5);
    // mpmath: 0.0031250467890792520637
    assert!((delta - 0.003_125_046_789_079_252).abs() < 1e-17);
    let p = params(1.0, delta);
    let t = TsgdParams::for_budget(&p).unwrap();
    assert_eq!(t.k(), 5);
    let prim = OptPrimitive::new(p);
    assert_eq!(prim.n1(), Some(6));
    assert_eq!(prim.n2(), Some(11));
    for n in 0..=12 {
        let via = selection_prob_via_threshold(&p, n).unwrap();
        assert!(
            (via - prim.prob(n)).abs() <= 1e-9,
            "n={n}: {via} vs {}",
            prim.prob(n)
        );
    }
}

#[test]
fn integral_k_across_budgets() {
    for eps in [0.1, 0.5, 1.0, 2.0] {
        for k in [1u64, 3, 8, 20] {
            let delta = integral_delta(eps, k);
            if !(delta > 0.0 && delta < 1.0) {
                continue;
            }
            let p = params(eps, delta);
            assert_eq!(TsgdParams::for_budget(&p).unwrap().k(), k);
            let prim = OptPrimitive::new(p);
            assert_eq!(prim.n2(), Some(2 * k + 1), "eps={eps} k={k}");
            for n in 0..=2 * k + 2 {
                let via = selection_prob_via_threshold(&p, n).unwrap();
                assert!((via - prim.prob(n)).abs() <= 1e-9, "eps={eps} k={k} n={n}");
            }
        }
    }
}

#[test]
fn reflection_identity_at_integral_k() {
    let p = params(1.0, integral_delta(1.0, 5));
    let prim = OptPrimitive::new(p);
    let (n1, n2) = (prim.n1().unwrap(), prim.n2().unwrap());
    for n in n1 + 1..=n2 {
        let mirrored = 1.0 - prim.prob(2 * n1 - 1 - n);
        assert!((prim.prob(n) - mirrored).abs() <= 1e-9, "n={n}");
    }
}

#[test]
fn thresholding_never_exceeds_optimal() {
    for (eps, delta) in [(1.0, 1e-5), (0.1, 1e-10), (0.5, 1e-3), (2.0, 0.2)] {
        let p = params(eps, delta);
        let prim = OptPrimitive::new(p);
        for n in 0..=prim.n2().unwrap() + 2 {
            assert!(selection_prob_via_threshold(&p, n).unwrap() <= prim.prob(n) + 1e-12);
        }
    }
}

#[test]
fn mechanism_is_dp_by_enumeration() {
    for eps in [0.1, 0.5, 1.0, 2.0] {
        for delta in [1e-10, 1e-5, 1e-2] {
            let t = TsgdParams::for_budget(&params(eps, delta)).unwrap();
            let k = t.k() as i64;
            assert!(
                t.delta_used() <= delta,
                "P(X=k) > delta at ({eps}, {delta})"
            );
            let e = eps.exp();
            let (mu, mu2) = (0i64, 1i64);
            for y in -k - 1..=k + 2 {
                let p = t.pmf(y - mu);
                let p2 = t.pmf(y - mu2);
                let slack_up = if y == mu + k + 1 { delta } else { 0.0 };
                let slack_down = if y == mu - k { delta } else { 0.0 };
                assert!(
                    p2 <= e * p * (1.0 + 1e-12) + slack_up,
                    "({eps}, {delta}) y={y}"
                );
                assert!(
                    p <= e * p2 * (1.0 + 1e-12) + slack_down,
                    "({eps}, {delta}) y={y}"
                );
            }
        }
    }
}

#[test]
fn closed_form_tail_matches_summation() {
    for (eps, delta) in [(1.0, 1e-5), (0.1, 1e-10), (3.0, 0.05)] {
        let t = TsgdParams::for_budget(&params(eps, delta)).unwrap();
        let k = t.k() as i64;
        for mu in -2..=2 * k + 3 {
            for y in -k - 3..=3 * k + 3 {
                let diff = (t.tail(mu, y) - brute_tail(&t, mu, y)).abs();
                assert!(diff <= 1e-12, "({eps}, {delta}) mu={mu} y={y} diff={diff}");
            }
        }
    }
}

#[test]
fn tail_monotone_in_both_arguments() {
    let t = TsgdParams::for_budget(&params(0.7, 1e-4)).unwrap();
    let k = t.k() as i64;
    for mu in -k..=2 * k {
        for y in -2 * k..=3 * k {
            assert!(t.tail(mu, y + 1) <= t.tail(mu, y));
            assert!(t.tail(mu + 1, y) >= t.tail(mu, y));
        }
    }
}

#[test]
fn sampler_chi_square() {
    let t = TsgdParams::for_budget(&params(1.0, 1e-5)).unwrap();
    let k = t.k() as i64;
    let draws = 1_000_000u64;
    let mut counts = vec![0u64; (2 * k + 1) as usize];
    let mut rng = ChaCha8Rng::seed_from_u64(20_210_531);
    let mut sum = 0i64;
    for _ in 0..draws {
        let x = t.sample(&mut rng);
        assert!((-k..=k).contains(&x));
        counts[(x + k) as usize] += 1;
        sum += x;
    }
    let mut chi2 = 0.0;
    let mut var = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let x = i as i64 - k;
        let p = t.pmf(x);
        let expected = p * draws as f64;
        chi2 += (c as f64 - expected).powi(2) / expected;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((c as f64 - expected).abs() <= 4.0 * sigma.max(1.0), "x={x}");
        var += p * (x * x) as f64;
    }
    // chi-square 0.999 quantile with 22 degrees of freedom (scipy)
    assert!(chi2 < 48.267_942_290_835_18, "chi2 = {chi2}");
    let mean = sum as f64 / draws as f64;
    assert!(
        mean.abs() <= 4.0 * (var / draws as f64).sqrt(),
        "mean = {mean}"
    );
}

proptest! {
    #[test]
    fn normalized_and_symmetric(p in 0.001f64..0.999, k in 1u64..400) {
        let t = TsgdParams::new(p, k).unwrap();
        let k = k as i64;
        let total: f64 = (-k..=k).map(|x| t.pmf(x)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert_eq!(t.pmf(k / 2), t.pmf(-(k / 2)));
    }

    #[test]
    fn k_is_smallest_admissible(eps in 0.01f64..5.0, log_delta in -12.0f64..-0.5) {
        let delta = 10f64.powf(log_delta);
        let t = TsgdParams::for_budget(&params(eps, delta)).unwrap();
        prop_assert!(t.delta_used() <= delta * (1.0 + 1e-12));
        if t.k() > 1 {
            let looser = TsgdParams::new(t.p(), t.k() - 1).unwrap();
            prop_assert!(looser.delta_used() > delta * (1.0 - 1e-9));
        }
    }
}
