//! The optimal partition selection primitive.
//!
//! For a partition with `n` unique users, [`OptPrimitive::prob`] is the largest
//! release probability any per-partition strategy can achieve under
//! `(epsilon, delta)`-DP. It grows geometrically up to the first crossover
//! point `n1`, then approaches one geometrically until the second crossover
//! point `n2`, and is exactly one afterwards.

use libm::{exp, expm1, log1p};
use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::math::{crossover_log, snapped_floor, to_u64};
use crate::params::PrivacyParams;

/// First crossover point: the last `n` on the exponential-growth branch.
///
/// Requires an effective `epsilon > 0` and effective `delta` in `(0, 1]`;
/// the degenerate budgets are handled by [`OptPrimitive`] directly.
pub fn compute_n1(params: &PrivacyParams) -> Result<u64> {
    let (eps, delta) = general_budget(params)?;
    Ok(1 + to_u64(snapped_floor(crossover_log(eps, delta) / eps)))
}

/// Second crossover point: the last `n` whose probability is still below one.
pub fn compute_n2(params: &PrivacyParams, n1: u64, pi_n1: f64) -> Result<u64> {
    let (eps, delta) = general_budget(params)?;
    let headroom = (1.0 - pi_n1).max(0.0);
    let span = log1p(expm1(eps) / delta * headroom) / eps;
    Ok(n1.saturating_add(to_u64(snapped_floor(span))))
}

fn general_budget(params: &PrivacyParams) -> Result<(f64, f64)> {
    let eps = params.effective_epsilon();
    let delta = params.effective_delta();
    if eps <= 0.0 {
        return Err(Error::InvalidParameters(
            "crossover points need epsilon > 0",
        ));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameters(
            "crossover points need delta in (0, 1]",
        ));
    }
    Ok((eps, delta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// `delta = 0`: nothing can ever be released.
    Zero,
    /// `epsilon = 0`: `min(1, n * delta)`.
    Linear { delta: f64 },
    General {
        eps: f64,
        delta: f64,
        expm1_eps: f64,
        n1: u64,
        n2: u64,
        pi_n1: f64,
    },
}

/// The optimal primitive for one budget, with its crossover points
/// precomputed so that every evaluation is O(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptPrimitive {
    params: PrivacyParams,
    shape: Shape,
}

impl OptPrimitive {
    pub fn new(params: PrivacyParams) -> Self {
        let eps = params.effective_epsilon();
        let delta = params.effective_delta();
        let shape = if delta == 0.0 {
            Shape::Zero
        } else if eps == 0.0 {
            Shape::Linear { delta }
        } else {
            let expm1_eps = expm1(eps);
            // Both unwraps are guarded by the branches above.
            let n1 = compute_n1(&params).expect("general budget");
            let pi_n1 = first_branch(n1, eps, delta, expm1_eps);
            let n2 = compute_n2(&params, n1, pi_n1).expect("general budget");
            Shape::General {
                eps,
                delta,
                expm1_eps,
                n1,
                n2,
                pi_n1,
            }
        };
        Self { params, shape }
    }

    pub fn params(&self) -> &PrivacyParams {
        &self.params
    }

    /// First crossover point, `None` for the degenerate budgets.
    pub fn n1(&self) -> Option<u64> {
        match self.shape {
            Shape::General { n1, .. } => Some(n1),
            _ => None,
        }
    }

    /// Second crossover point, `None` for the degenerate budgets.
    pub fn n2(&self) -> Option<u64> {
        match self.shape {
            Shape::General { n2, .. } => Some(n2),
            _ => None,
        }
    }

    pub fn pi_n1(&self) -> Option<f64> {
        match self.shape {
            Shape::General { pi_n1, .. } => Some(pi_n1),
            _ => None,
        }
    }

    /// Smallest `n` with release probability exactly one, if any.
    pub fn saturation_point(&self) -> Option<u64> {
        match self.shape {
            Shape::Zero => None,
            Shape::Linear { delta } => {
                let mut n = to_u64(libm::ceil(1.0 / delta)).max(1);
                while n > 1 && ((n - 1) as f64) * delta >= 1.0 {
                    n -= 1;
                }
                while (n as f64) * delta < 1.0 {
                    n += 1;
                }
                Some(n)
            }
            Shape::General { n2, .. } => Some(n2.saturating_add(1)),
        }
    }

    /// Release probability for a partition with `n` unique users.
    pub fn prob(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self.shape {
            Shape::Zero => 0.0,
            Shape::Linear { delta } => (n as f64 * delta).min(1.0),
            Shape::General {
                eps,
                delta,
                expm1_eps,
                n1,
                n2,
                pi_n1,
            } => {
                if n <= n1 {
                    first_branch(n, eps, delta, expm1_eps)
                } else if n <= n2 {
                    let m = (n - n1) as f64;
                    let decay = exp(-m * eps);
                    let v = -expm1(-m * eps) * (1.0 + delta / expm1_eps) + decay * pi_n1;
                    v.min(1.0)
                } else {
                    1.0
                }
            }
        }
    }

    /// Samples the keep/drop decision for a partition with `n` users.
    pub fn should_keep<R: RngCore + ?Sized>(&self, n: u64, rng: &mut R) -> bool {
        crate::bernoulli(self.prob(n), rng)
    }
}

fn first_branch(n: u64, eps: f64, delta: f64, expm1_eps: f64) -> f64 {
    (expm1(n as f64 * eps) / expm1_eps * delta).min(1.0)
}

/// Expected number of released partitions, given each partition's
/// unique-user count.
pub fn expected_output_size<I>(counts: I, prim: &OptPrimitive) -> f64
where
    I: IntoIterator<Item = u64>,
{
    counts.into_iter().map(|n| prim.prob(n)).sum()
}
