//! The k-truncated symmetric geometric distribution (k-TSGD) and the
//! truncated geometric mechanism.
//!
//! Adding k-TSGD noise with `p = 1 - e^-eps` to a sensitivity-1 count and
//! releasing only values above `k` reproduces the optimal primitive exactly
//! whenever the crossover quotient is integral, and is never more generous
//! than it otherwise.

use libm::{exp, expm1, floor, log1p};
use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::math::{crossover_log, snapped_ceil, to_u64};
use crate::params::PrivacyParams;
use crate::uniform01;

/// Parameters of a k-TSGD: `P(X = x) = c (1-p)^|x|` on `[-k, k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsgdParams {
    p: f64,
    k: u64,
    c: f64,
    /// `-ln(1 - p)`, kept to evaluate powers of `1 - p` as exponentials.
    rate: f64,
}

impl TsgdParams {
    /// A k-TSGD with success probability `p` in `(0, 1)` and `k >= 1`.
    pub fn new(p: f64, k: u64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameters("p must lie in (0, 1)"));
        }
        if k == 0 {
            return Err(Error::InvalidParameters("k must be >= 1"));
        }
        Ok(Self::from_rate(-log1p(-p), k))
    }

    fn from_rate(rate: f64, k: u64) -> Self {
        let p = -expm1(-rate);
        // 1 + (1-p) - 2(1-p)^(k+1), rewritten with expm1.
        let denom = expm1(-rate) - 2.0 * expm1(-((k as f64) + 1.0) * rate);
        Self {
            p,
            k,
            c: p / denom,
            rate,
        }
    }

    /// Parameters of the truncated geometric mechanism for a budget.
    ///
    /// `k` is the integer ceiling of the crossover quotient, which may spend
    /// slightly less than `delta`; see [`TsgdParams::delta_used`].
    pub fn for_budget(params: &PrivacyParams) -> Result<Self> {
        let eps = params.effective_epsilon();
        let delta = params.effective_delta();
        if eps <= 0.0 {
            return Err(Error::InvalidParameters(
                "the truncated geometric mechanism needs epsilon > 0",
            ));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameters(
                "the truncated geometric mechanism needs delta in (0, 1)",
            ));
        }
        let k = to_u64(snapped_ceil(crossover_log(eps, delta) / eps)).max(1);
        Ok(Self::from_rate(eps, k))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `P(X = k)`, the delta actually consumed by the mechanism.
    pub fn delta_used(&self) -> f64 {
        self.c * exp(-(self.k as f64) * self.rate)
    }

    pub fn pmf(&self, x: i64) -> f64 {
        let mag = x.unsigned_abs();
        if mag > self.k {
            0.0
        } else {
            self.c * exp(-(mag as f64) * self.rate)
        }
    }

    /// `P(mu + X >= y)`: the tail of the mechanism's output for true value `mu`.
    pub fn tail(&self, mu: i64, y: i64) -> f64 {
        let k = self.k as i128;
        let d = mu as i128 - y as i128;
        let delta_k = self.delta_used();
        let denom = expm1(self.rate);
        if d < -k {
            0.0
        } else if d <= 0 {
            let j = (d + k + 1) as f64;
            (expm1(j * self.rate) / denom * delta_k).min(1.0)
        } else if d < k {
            let j = (k - d) as f64;
            (1.0 - expm1(j * self.rate) / denom * delta_k).max(0.0)
        } else {
            1.0
        }
    }

    /// Draws one value of `X`.
    ///
    /// Inverse transform in closed form: first whether `X = 0`, then a sign,
    /// then a geometric magnitude truncated to `[1, k]`. Uses three uniforms
    /// for nonzero draws and one for zero.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        if uniform01(rng) < self.c {
            return 0;
        }
        let negative = rng.next_u64() & 1 == 1;
        let v = uniform01(rng);
        // P(|X| - 1 >= t | X != 0) = (q^t - q^k) / (1 - q^k) with q = e^-rate.
        let mass = -expm1(-(self.k as f64) * self.rate);
        let t = floor(log1p(-v * mass) / -self.rate);
        let mag = (t.max(0.0) as u64).saturating_add(1).min(self.k) as i64;
        if negative {
            -mag
        } else {
            mag
        }
    }

    /// Adds one draw of noise to `count`.
    pub fn noisy<R: RngCore + ?Sized>(&self, count: i64, rng: &mut R) -> i64 {
        count.saturating_add(self.sample(rng))
    }
}

/// Probability that a count of `n` survives thresholding at `k`:
/// `P(n + X >= k + 1)` for the mechanism calibrated to `params`.
pub fn selection_prob_via_threshold(params: &PrivacyParams, n: u64) -> Result<f64> {
    let t = TsgdParams::for_budget(params)?;
    Ok(t.tail(i64::try_from(n).unwrap_or(i64::MAX), t.k as i64 + 1))
}
