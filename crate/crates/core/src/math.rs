//! Small numerical helpers shared by the primitives.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{ceil, erfc, exp, expm1, floor, log1p, round, sqrt};

/// `ln((e^eps + 2 delta - 1) / ((e^eps + 1) delta))`, written as a `log1p`
/// so that small `eps` keeps its precision.
pub(crate) fn crossover_log(eps: f64, delta: f64) -> f64 {
    let ratio = expm1(eps) * (1.0 - delta) / ((exp(eps) + 1.0) * delta);
    log1p(ratio)
}

/// Pulls `x` onto the nearest integer when it is within a few dozen ulps of
/// it, so that exactly-integral crossover quotients survive rounding.
fn snap(x: f64) -> f64 {
    let r = round(x);
    let tol = 64.0 * f64::EPSILON * x.abs().max(1.0);
    if (x - r).abs() <= tol {
        r
    } else {
        x
    }
}

pub(crate) fn snapped_floor(x: f64) -> f64 {
    floor(snap(x))
}

pub(crate) fn snapped_ceil(x: f64) -> f64 {
    ceil(snap(x))
}

/// Converts a nonnegative float that already went through floor/ceil.
pub(crate) fn to_u64(x: f64) -> u64 {
    if x <= 0.0 {
        0
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x as u64
    }
}

/// Standard normal CDF.
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal survival function `P(Z > x)`.
pub(crate) fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Lower quantile of the standard normal: the `x` with `P(Z <= x) = p`.
///
/// Acklam's rational approximation followed by two Halley steps against
/// the `erfc`-based CDF.
#[allow(clippy::excessive_precision)]
pub(crate) fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if p < P_LOW {
        let q = sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = sqrt(-2.0 * log1p(-p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * sqrt(2.0 * PI) * exp(x * x / 2.0);
        x -= u / (1.0 + x * u / 2.0);
    }
    x
}

/// Upper quantile: the `z` with `P(Z > z) = p`.
pub(crate) fn normal_upper_quantile(p: f64) -> f64 {
    -normal_quantile(p)
}
