//! Release modes over a partition histogram.
//!
//! All randomness is drawn from a per-partition ChaCha stream derived from a
//! master seed and the partition key, so results do not depend on how the
//! work is scheduled across threads.

use std::collections::BTreeSet;

use partsel_core::{OptPrimitive, PrivacyParams, TsgdParams};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{PipelineError, Result};
use crate::histogram::PartitionHistogram;

/// A released partition; `noisy_count` is set by the count-release modes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ReleaseRecord {
    pub partition: Vec<u8>,
    pub noisy_count: Option<i64>,
}

/// Random stream for one partition.
pub fn partition_rng(seed: u64, key: &[u8]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"partsel/partition-stream/v1");
    h.update(seed.to_le_bytes());
    h.update((key.len() as u64).to_le_bytes());
    h.update(key);
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Keeps each present partition independently with probability
/// `prim.prob(count)`. Returns the kept keys in sorted order.
///
/// A capped histogram is accepted only if the cap is at or past the point
/// where the primitive reaches one, so capping cannot change a decision.
pub fn select_partitions(
    hist: &PartitionHistogram,
    prim: &OptPrimitive,
    seed: u64,
) -> Result<Vec<Vec<u8>>> {
    if let (Some(cap), Some(sat)) = (hist.cap(), prim.saturation_point()) {
        if cap < sat {
            return Err(PipelineError::config(format!(
                "cap {cap} is below {sat}, the smallest count released with probability one"
            )));
        }
    }
    let entries: Vec<_> = hist.entries().iter().collect();
    Ok(entries
        .into_par_iter()
        .filter(|(key, n)| prim.should_keep(**n, &mut partition_rng(seed, key)))
        .map(|(key, _)| key.clone())
        .collect())
}

fn require_uncapped(hist: &PartitionHistogram) -> Result<()> {
    match hist.cap() {
        Some(cap) => Err(PipelineError::config(format!(
            "count release publishes true counts and cannot use a capped histogram (cap {cap})"
        ))),
        None => Ok(()),
    }
}

fn as_i64(n: u64) -> i64 {
    i64::try_from(n).unwrap_or(i64::MAX)
}

/// Truncated-geometric thresholded release: every present partition gets
/// k-TSGD noise and is published with its noisy count when that exceeds `k`.
pub fn thresholded_release(
    hist: &PartitionHistogram,
    params: &PrivacyParams,
    seed: u64,
) -> Result<Vec<ReleaseRecord>> {
    require_uncapped(hist)?;
    let tsgd = TsgdParams::for_budget(params)?;
    let k = as_i64(tsgd.k());
    let entries: Vec<_> = hist.entries().iter().collect();
    Ok(entries
        .into_par_iter()
        .filter_map(|(key, n)| {
            let noisy = tsgd.noisy(as_i64(*n), &mut partition_rng(seed, key));
            (noisy > k).then(|| ReleaseRecord {
                partition: key.clone(),
                noisy_count: Some(noisy),
            })
        })
        .collect())
}

/// Release with a public key list and a second threshold.
///
/// Public keys (present in the data or not) are published when their noisy
/// count exceeds `public_threshold`; keys found only in the data use `k`.
pub fn dual_threshold_release(
    hist: &PartitionHistogram,
    public_keys: &BTreeSet<Vec<u8>>,
    params: &PrivacyParams,
    public_threshold: i64,
    seed: u64,
) -> Result<Vec<ReleaseRecord>> {
    require_uncapped(hist)?;
    let tsgd = TsgdParams::for_budget(params)?;
    let k = as_i64(tsgd.k());
    if !(0..=k).contains(&public_threshold) {
        return Err(PipelineError::config(format!(
            "public threshold must lie in [0, {k}], got {public_threshold}"
        )));
    }
    let keys: BTreeSet<&Vec<u8>> = hist.entries().keys().chain(public_keys.iter()).collect();
    let keys: Vec<_> = keys.into_iter().collect();
    Ok(keys
        .into_par_iter()
        .filter_map(|key| {
            let count = as_i64(hist.get(key));
            let noisy = tsgd.noisy(count, &mut partition_rng(seed, key));
            let bar = if public_keys.contains(key) {
                public_threshold
            } else {
                k
            };
            (noisy > bar).then(|| ReleaseRecord {
                partition: key.clone(),
                noisy_count: Some(noisy),
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PrivacyParams {
        PrivacyParams::add_remove(1.0, 1e-5).unwrap()
    }

    #[test]
    fn stream_depends_on_seed_and_key() {
        use rand_core::RngCore;
        let a = partition_rng(1, b"a").next_u64();
        assert_eq!(a, partition_rng(1, b"a").next_u64());
        assert_ne!(a, partition_rng(2, b"a").next_u64());
        assert_ne!(a, partition_rng(1, b"b").next_u64());
    }

    #[test]
    fn saturated_partitions_always_kept() {
        let prim = OptPrimitive::new(params());
        let sat = prim.saturation_point().unwrap();
        let hist =
            PartitionHistogram::from_counts([("big", sat), ("bigger", sat + 4)], None).unwrap();
        for seed in 0..200 {
            assert_eq!(select_partitions(&hist, &prim, seed).unwrap().len(), 2);
        }
    }

    #[test]
    fn cap_below_saturation_is_rejected() {
        let prim = OptPrimitive::new(params());
        let n2 = prim.n2().unwrap();
        let hist = PartitionHistogram::from_counts([("a", 3)], Some(n2 - 1)).unwrap();
        assert!(matches!(
            select_partitions(&hist, &prim, 0),
            Err(PipelineError::Config(_))
        ));
        let hist = PartitionHistogram::from_counts([("a", 3)], Some(n2 + 1)).unwrap();
        assert!(select_partitions(&hist, &prim, 0).is_ok());
    }

    #[test]
    fn count_release_rejects_cap() {
        let hist = PartitionHistogram::from_counts([("a", 3)], Some(100)).unwrap();
        assert!(thresholded_release(&hist, &params(), 0).is_err());
        assert!(dual_threshold_release(&hist, &BTreeSet::new(), &params(), 0, 0).is_err());
    }

    #[test]
    fn large_counts_always_released_within_support() {
        let tsgd = TsgdParams::for_budget(&params()).unwrap();
        let k = tsgd.k();
        let hist = PartitionHistogram::from_counts([("a", 2 * k + 1)], None).unwrap();
        for seed in 0..500 {
            let out = thresholded_release(&hist, &params(), seed).unwrap();
            assert_eq!(out.len(), 1);
            let c = out[0].noisy_count.unwrap();
            assert!((k as i64 + 1..=3 * k as i64 + 1).contains(&c));
        }
    }

    #[test]
    fn public_threshold_range() {
        let hist = PartitionHistogram::default();
        let k = TsgdParams::for_budget(&params()).unwrap().k() as i64;
        let public = BTreeSet::new();
        assert!(dual_threshold_release(&hist, &public, &params(), -1, 0).is_err());
        assert!(dual_threshold_release(&hist, &public, &params(), k + 1, 0).is_err());
        assert!(dual_threshold_release(&hist, &public, &params(), k, 0).is_ok());
    }

    #[test]
    fn threshold_k_never_leaks_absent_public_keys() {
        let k = TsgdParams::for_budget(&params()).unwrap().k() as i64;
        let hist = PartitionHistogram::from_counts([("present", 30)], None).unwrap();
        let public: BTreeSet<Vec<u8>> = (0..2000).map(|i| format!("pub{i}").into_bytes()).collect();
        let out = dual_threshold_release(&hist, &public, &params(), k, 9).unwrap();
        assert!(out.iter().all(|r| r.partition == b"present"));
    }
}
