//! Timing of closed-form keep/drop decisions.

use std::hint::black_box;
use std::time::{Duration, Instant};

use partsel_core::OptPrimitive;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub iterations: u64,
    pub elapsed: Duration,
    pub kept: u64,
    /// `(n, ns/op)` for a fixed user count in each regime of the primitive.
    pub per_regime: Vec<(u64, f64)>,
}

impl BenchReport {
    pub fn ns_per_op(&self) -> f64 {
        self.elapsed.as_nanos() as f64 / self.iterations.max(1) as f64
    }
}

fn time_decisions(
    prim: &OptPrimitive,
    iterations: u64,
    n_of: impl Fn(u64) -> u64,
    seed: u64,
) -> (Duration, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = 0u64;
    let start = Instant::now();
    for i in 0..iterations {
        kept += u64::from(prim.should_keep(black_box(n_of(i)), &mut rng));
    }
    (start.elapsed(), black_box(kept))
}

/// Times `iterations` probability evaluations plus Bernoulli draws, with
/// user counts cycling over `0..=n2 + 2`, then the same count of decisions
/// at a fixed `n` below `n1`, between the crossovers and past `n2`.
pub fn run(prim: &OptPrimitive, iterations: u64, seed: u64) -> BenchReport {
    let span = prim.saturation_point().unwrap_or(1) + 2;
    let (elapsed, kept) = time_decisions(prim, iterations, |i| i % span, seed);
    let regimes = match (prim.n1(), prim.n2()) {
        (Some(n1), Some(n2)) => vec![1.max(n1 / 2), (n1 + n2) / 2 + 1, n2 + 10],
        _ => vec![1, 10, 1000],
    };
    let per_regime = regimes
        .into_iter()
        .map(|n| {
            let (d, _) = time_decisions(prim, iterations, |_| n, seed);
            (n, d.as_nanos() as f64 / iterations.max(1) as f64)
        })
        .collect();
    BenchReport {
        iterations,
        elapsed,
        kept,
        per_regime,
    }
}
