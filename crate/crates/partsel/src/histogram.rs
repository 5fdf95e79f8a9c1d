//! Unique-user counting per partition.
//!
//! Rows are `(user_id, partition)` pairs. Each user may contribute to a
//! bounded number of partitions (one by default); a per-user ledger of the
//! partitions already credited provides both exact deduplication of repeated
//! pairs and the contribution bound. With a cap, a partition's count stops
//! growing once it reaches the cap.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{PipelineError, Result};

/// What to do when a user shows up in more partitions than allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContributionMode {
    /// Abort with a violation error.
    #[default]
    Strict,
    /// Keep the user's first partitions in input order and drop later ones.
    /// This is non-private preprocessing that depends on row order.
    FirstWins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    pub mode: ContributionMode,
    pub cap: Option<u64>,
    /// Distinct partitions each user may contribute to.
    pub max_partitions_per_user: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            mode: ContributionMode::Strict,
            cap: None,
            max_partitions_per_user: 1,
        }
    }
}

impl IngestOptions {
    fn validate(&self) -> Result<()> {
        if self.cap == Some(0) {
            return Err(PipelineError::config("cap must be positive"));
        }
        if self.max_partitions_per_user == 0 {
            return Err(PipelineError::config(
                "users must be allowed at least one partition",
            ));
        }
        Ok(())
    }
}

/// Unique-user counts per partition key, in lexicographic key order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartitionHistogram {
    counts: BTreeMap<Vec<u8>, u64>,
    cap: Option<u64>,
}

impl PartitionHistogram {
    /// Builds a histogram directly from counts; zero counts are dropped and
    /// the rest clamped to the cap.
    pub fn from_counts<I, K>(counts: I, cap: Option<u64>) -> Result<Self>
    where
        I: IntoIterator<Item = (K, u64)>,
        K: Into<Vec<u8>>,
    {
        if cap == Some(0) {
            return Err(PipelineError::config("cap must be positive"));
        }
        let counts = counts
            .into_iter()
            .filter(|(_, n)| *n > 0)
            .map(|(k, n)| (k.into(), cap.map_or(n, |c| n.min(c))))
            .collect();
        Ok(Self { counts, cap })
    }

    pub fn cap(&self) -> Option<u64> {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, key: &[u8]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u64)> {
        self.counts.iter().map(|(k, n)| (k.as_slice(), *n))
    }

    pub(crate) fn entries(&self) -> &BTreeMap<Vec<u8>, u64> {
        &self.counts
    }

    /// Adds another histogram's counts. Both sides must use the same cap, and
    /// their users must be disjoint for the result to be meaningful.
    pub fn merge(&mut self, other: PartitionHistogram) -> Result<()> {
        if self.cap != other.cap {
            return Err(PipelineError::config(
                "cannot merge histograms with different caps",
            ));
        }
        for (key, n) in other.counts {
            let slot = self.counts.entry(key).or_insert(0);
            *slot = slot.saturating_add(n);
            if let Some(c) = self.cap {
                *slot = (*slot).min(c);
            }
        }
        Ok(())
    }

    /// Expected number of partitions the optimal primitive releases.
    pub fn expected_output_size(&self, prim: &partsel_core::OptPrimitive) -> f64 {
        partsel_core::expected_output_size(self.counts.values().copied(), prim)
    }
}

/// Streaming builder; feed rows with [`HistogramBuilder::push`].
#[derive(Debug)]
pub struct HistogramBuilder {
    options: IngestOptions,
    /// Partition ids each user has been credited to.
    ledger: HashMap<Vec<u8>, Vec<usize>>,
    partition_ids: HashMap<Vec<u8>, usize>,
    keys: Vec<Vec<u8>>,
    counts: Vec<u64>,
}

impl HistogramBuilder {
    pub fn new(options: IngestOptions) -> Result<Self> {
        options.validate()?;
        Ok(Self {
            options,
            ledger: HashMap::new(),
            partition_ids: HashMap::new(),
            keys: Vec::new(),
            counts: Vec::new(),
        })
    }

    /// Credits `user` to `partition`. `line` is only used in error messages.
    pub fn push(&mut self, user: &[u8], partition: &[u8], line: u64) -> Result<()> {
        if user.is_empty() || partition.is_empty() {
            return Err(PipelineError::Parse {
                line,
                message: "user_id and partition must be nonempty".into(),
            });
        }
        let pid = match self.partition_ids.get(partition) {
            Some(&id) => id,
            None => {
                let id = self.keys.len();
                self.partition_ids.insert(partition.to_vec(), id);
                self.keys.push(partition.to_vec());
                self.counts.push(0);
                id
            }
        };
        let credited = match self.ledger.get_mut(user) {
            Some(list) => list,
            None => self.ledger.entry(user.to_vec()).or_default(),
        };
        if credited.contains(&pid) {
            return Ok(());
        }
        if credited.len() >= self.options.max_partitions_per_user {
            return match self.options.mode {
                ContributionMode::Strict => Err(PipelineError::StrictViolation {
                    user: String::from_utf8_lossy(user).into_owned(),
                    limit: self.options.max_partitions_per_user,
                    line,
                }),
                ContributionMode::FirstWins => Ok(()),
            };
        }
        credited.push(pid);
        let count = &mut self.counts[pid];
        if self.options.cap.is_none_or(|c| *count < c) {
            *count += 1;
        }
        Ok(())
    }

    pub fn finish(self) -> PartitionHistogram {
        let counts = self
            .keys
            .into_iter()
            .zip(self.counts)
            .filter(|(_, n)| *n > 0)
            .collect();
        PartitionHistogram {
            counts,
            cap: self.options.cap,
        }
    }
}

/// Single-pass ingestion of in-memory rows. Line numbers count from 2 to
/// match a CSV file with a header.
pub fn ingest<I, U, P>(rows: I, options: IngestOptions) -> Result<PartitionHistogram>
where
    I: IntoIterator<Item = (U, P)>,
    U: AsRef<[u8]>,
    P: AsRef<[u8]>,
{
    let mut builder = HistogramBuilder::new(options)?;
    for (i, (user, partition)) in rows.into_iter().enumerate() {
        builder.push(user.as_ref(), partition.as_ref(), i as u64 + 2)?;
    }
    Ok(builder.finish())
}

/// Stable shard assignment for a user id (FNV-1a).
pub fn user_shard(user: &[u8], shards: usize) -> usize {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in user {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    (h % shards.max(1) as u64) as usize
}

/// Routes rows to `shards` builders by user id, ingests the shards in
/// parallel and merges them. Equivalent to [`ingest`] on the same rows.
pub fn ingest_sharded<U, P>(
    rows: &[(U, P)],
    shards: usize,
    options: IngestOptions,
) -> Result<PartitionHistogram>
where
    U: AsRef<[u8]> + Sync,
    P: AsRef<[u8]> + Sync,
{
    let shards = shards.max(1);
    let mut routed: Vec<Vec<(usize, &U, &P)>> = vec![Vec::new(); shards];
    for (i, (u, p)) in rows.iter().enumerate() {
        routed[user_shard(u.as_ref(), shards)].push((i, u, p));
    }
    let parts = routed
        .into_par_iter()
        .map(|shard| {
            let mut builder = HistogramBuilder::new(options)?;
            for (i, u, p) in shard {
                builder.push(u.as_ref(), p.as_ref(), i as u64 + 2)?;
            }
            Ok(builder.finish())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut merged = PartitionHistogram {
        counts: BTreeMap::new(),
        cap: options.cap,
    };
    for part in parts {
        merged.merge(part)?;
    }
    Ok(merged)
}
