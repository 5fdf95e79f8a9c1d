use libm::{ceil, exp, log, log1p};
use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::math::to_u64;
use crate::params::PrivacyParams;
use crate::search::SelectionPrimitive;
use crate::uniform01;

/// Laplace-based partition selection: keep a partition when
/// `n + Lap(1/eps) >= 1 - ln(2 delta) / eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacePrimitive {
    epsilon: f64,
    delta: f64,
    threshold: f64,
}

impl LaplacePrimitive {
    pub fn new(params: &PrivacyParams) -> Result<Self> {
        let epsilon = params.effective_epsilon();
        let delta = params.effective_delta();
        if epsilon <= 0.0 {
            return Err(Error::InvalidParameters(
                "Laplace thresholding needs epsilon > 0",
            ));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameters(
                "Laplace thresholding needs delta in (0, 1)",
            ));
        }
        Ok(Self {
            epsilon,
            delta,
            threshold: 1.0 - log(2.0 * delta) / epsilon,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Keep probability, forced to zero for an absent partition.
    pub fn prob(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let gap = n as f64 - self.threshold;
        if gap <= 0.0 {
            0.5 * exp(self.epsilon * gap)
        } else {
            1.0 - 0.5 * exp(-self.epsilon * gap)
        }
    }

    pub fn sample_noise<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = uniform01(rng) - 0.5;
        let scale = 1.0 / self.epsilon;
        -scale * u.signum() * log1p(-2.0 * u.abs())
    }

    pub fn should_keep<R: RngCore + ?Sized>(&self, n: u64, rng: &mut R) -> bool {
        n > 0 && n as f64 + self.sample_noise(rng) >= self.threshold
    }
}

impl SelectionPrimitive for LaplacePrimitive {
    fn prob(&self, n: u64) -> f64 {
        LaplacePrimitive::prob(self, n)
    }

    fn search_cap(&self) -> u64 {
        to_u64(ceil(self.threshold) + ceil(64.0 / self.epsilon)).max(1)
    }
}
