use libm::{ceil, exp, expm1, log, log1p, sqrt};

use crate::error::{Error, Result};
use crate::math::{normal_cdf, normal_sf, normal_upper_quantile, to_u64};
use crate::params::PrivacyParams;
use crate::search::SelectionPrimitive;

/// Privacy profile of the Gaussian mechanism with noise `sigma` and L2
/// sensitivity `sensitivity`: the smallest delta it satisfies at `eps`.
pub fn analytic_gaussian_delta(eps: f64, sigma: f64, sensitivity: f64) -> f64 {
    let a = sensitivity / (2.0 * sigma);
    let b = eps * sigma / sensitivity;
    (normal_cdf(a - b) - exp(eps) * normal_cdf(-a - b)).max(0.0)
}

/// Smallest `sigma` for which the Gaussian mechanism is `(eps, delta)`-DP,
/// found by bisection on the exact privacy profile.
pub fn analytic_gaussian_sigma(eps: f64, delta: f64, sensitivity: f64) -> Result<f64> {
    let valid = eps > 0.0 && delta > 0.0 && delta < 1.0 && sensitivity > 0.0;
    if !valid {
        return Err(Error::InvalidParameters(
            "Gaussian calibration needs eps > 0, delta in (0, 1), sensitivity > 0",
        ));
    }
    let profile = |sigma: f64| analytic_gaussian_delta(eps, sigma, sensitivity);
    let mut lo = sensitivity * 1e-3;
    let mut hi = sensitivity;
    let mut tries = 0;
    while profile(lo) <= delta {
        lo /= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Calibration("no lower bracket for sigma"));
        }
    }
    tries = 0;
    while profile(hi) > delta {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Calibration("no upper bracket for sigma"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Gaussian-based thresholding for users contributing to `kappa`
/// partitions each.
///
/// Counts get Gaussian noise calibrated for L2 sensitivity `sqrt(kappa)` with
/// `delta_noise`; the threshold keeps the chance that any of a user's
/// `kappa` otherwise-empty partitions (count 1) crosses it below
/// `delta_threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrimitive {
    epsilon: f64,
    delta_noise: f64,
    delta_threshold: f64,
    sigma: f64,
    threshold: f64,
    kappa: u32,
}

impl GaussianPrimitive {
    /// Calibrates with a fixed `delta_noise`; the rest of the budget's delta
    /// goes to the threshold.
    pub fn with_split(params: &PrivacyParams, kappa: u32, delta_noise: f64) -> Result<Self> {
        let epsilon = params.effective_epsilon();
        let delta = params.effective_delta();
        if kappa == 0 {
            return Err(Error::InvalidParameters("kappa must be >= 1"));
        }
        if !(delta > 0.0 && delta < 1.0) || epsilon <= 0.0 {
            return Err(Error::InvalidParameters(
                "Gaussian thresholding needs epsilon > 0 and delta in (0, 1)",
            ));
        }
        if !(delta_noise > 0.0 && delta_noise < delta) {
            return Err(Error::InvalidParameters(
                "delta_noise must lie in (0, delta)",
            ));
        }
        let delta_threshold = delta - delta_noise;
        let sigma = analytic_gaussian_sigma(epsilon, delta_noise, sqrt(f64::from(kappa)))?;
        // 1 - (1 - delta_threshold)^(1/kappa)
        let per_partition = -expm1(log1p(-delta_threshold) / f64::from(kappa));
        let threshold = 1.0 + sigma * normal_upper_quantile(per_partition);
        if !threshold.is_finite() {
            return Err(Error::Calibration("threshold is not finite"));
        }
        Ok(Self {
            epsilon,
            delta_noise,
            delta_threshold,
            sigma,
            threshold,
            kappa,
        })
    }

    /// Calibrates with the delta split that minimizes the threshold.
    ///
    /// Golden-section search over the log of the fraction of delta given to
    /// the noise, 64 iterations.
    pub fn new(params: &PrivacyParams, kappa: u32) -> Result<Self> {
        let delta = params.effective_delta();
        let build = |log_frac: f64| Self::with_split(params, kappa, delta * exp(log_frac));
        let score = |log_frac: f64| build(log_frac).map(|g| g.threshold);

        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut lo = log(1e-8);
        let mut hi = log1p(-1e-8);
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = score(x1)?;
        let mut f2 = score(x2)?;
        for _ in 0..64 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = score(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = score(x2)?;
            }
        }
        build(if f1 <= f2 { x1 } else { x2 })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta_noise(&self) -> f64 {
        self.delta_noise
    }

    pub fn delta_threshold(&self) -> f64 {
        self.delta_threshold
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn prob(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        normal_sf((self.threshold - n as f64) / self.sigma)
    }
}

impl SelectionPrimitive for GaussianPrimitive {
    fn prob(&self, n: u64) -> f64 {
        GaussianPrimitive::prob(self, n)
    }

    fn search_cap(&self) -> u64 {
        let laplace_style = ceil(self.threshold) + ceil(64.0 / self.epsilon);
        let tail = ceil(self.threshold + 40.0 * self.sigma);
        to_u64(laplace_style.max(tail)).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(eps: f64, delta: f64) -> PrivacyParams {
        PrivacyParams::add_remove(eps, delta).unwrap()
    }

    #[test]
    fn sigma_meets_profile() {
        let sigma = analytic_gaussian_sigma(1.0, 1e-5, 1.0).unwrap();
        let d = analytic_gaussian_delta(1.0, sigma, 1.0);
        assert!(d <= 1e-5 && d > 1e-5 * (1.0 - 1e-9), "d = {d}");
        // Known value for the analytic Gaussian mechanism at (1, 1e-5).
        assert!((sigma - 3.730).abs() < 0.01, "sigma = {sigma}");
    }

    #[test]
    fn sigma_shrinks_as_delta_grows() {
        let mut prev = f64::INFINITY;
        for d in [1e-12, 1e-9, 1e-6, 1e-3, 1e-1] {
            let s = analytic_gaussian_sigma(1.0, d, 1.0).unwrap();
            assert!(s < prev);
            prev = s;
        }
    }

    #[test]
    fn split_adds_up_and_threshold_is_sane() {
        for kappa in 1..=7 {
            for (eps, delta) in [(1.0, 1e-5), (0.1, 1e-10), (2.0, 1e-3)] {
                let g = GaussianPrimitive::new(&budget(eps, delta), kappa).unwrap();
                assert!(
                    (g.delta_noise() + g.delta_threshold() - delta).abs()
                        <= 1e-15 * delta.max(1e-300) + 1e-20
                );
                assert!(g.threshold().is_finite() && g.threshold() > 1.0);
                // Crossing check for an empty partition at count 1.
                let cross = normal_sf((g.threshold() - 1.0) / g.sigma());
                let any = -expm1(f64::from(kappa) * log1p(-cross));
                assert!(any <= g.delta_threshold() * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn optimized_split_beats_fixed_splits() {
        let p = budget(1.0, 1e-5);
        let best = GaussianPrimitive::new(&p, 3).unwrap();
        for f in [0.01, 0.1, 0.5, 0.9, 0.99] {
            let g = GaussianPrimitive::with_split(&p, 3, 1e-5 * f).unwrap();
            assert!(best.threshold() <= g.threshold() + 1e-9);
        }
    }

    #[test]
    fn tail_values() {
        let g = GaussianPrimitive::new(&budget(1.0, 1e-5), 1).unwrap();
        assert_eq!(g.prob(0), 0.0);
        let t = g.threshold();
        // Evaluate the survival curve at non-integer points through the formula.
        assert!((normal_sf((t - t) / g.sigma()) - 0.5).abs() < 1e-15);
        assert!((normal_sf(-1.0) - 0.841_344_746_068_543).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = budget(1.0, 1e-5);
        assert!(GaussianPrimitive::with_split(&p, 0, 1e-6).is_err());
        assert!(GaussianPrimitive::with_split(&p, 1, 1e-5).is_err());
        assert!(GaussianPrimitive::new(&budget(0.0, 1e-5), 1).is_err());
    }
}
