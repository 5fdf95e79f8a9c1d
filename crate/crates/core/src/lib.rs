//! Differentially private partition selection.
//!
//! This crate holds the pure numerical side of partition selection: the
//! optimal selection primitive and its crossover points, the truncated
//! symmetric geometric distribution and the noisy-thresholding mechanism built
//! on it, and the Laplace and Gaussian thresholding baselines used for
//! comparison. It is `no_std` (with `alloc`) and does no IO; randomness is
//! always supplied by the caller through [`rand_core::RngCore`].
//!
//! The [`partsel`](../partsel/index.html) companion crate carries CSV
//! ingestion, release pipelines and the command-line tool.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod math;
mod params;

pub mod baselines;
pub mod primitive;
pub mod recursive;
pub mod search;
pub mod tsgd;

pub use error::{Error, Result};
pub use params::{Neighboring, PrivacyParams};
pub use primitive::{compute_n1, compute_n2, expected_output_size, OptPrimitive};
pub use search::{midpoint, percentile_n, SelectionPrimitive};
pub use tsgd::{selection_prob_via_threshold, TsgdParams};

/// Draws a uniform double in `[0, 1)` from the top 53 bits of one `u64`.
#[inline]
pub fn uniform01<R: rand_core::RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Returns `true` with probability `prob`, consuming exactly one `u64`.
#[inline]
pub fn bernoulli<R: rand_core::RngCore + ?Sized>(prob: f64, rng: &mut R) -> bool {
    uniform01(rng) < prob
}
