//! End-to-end driver for the `select` command: read rows, build the
//! histogram, run one release mode and serialize the result.

use std::collections::BTreeSet;
use std::io::Read;

use partsel_core::{OptPrimitive, PrivacyParams};

use crate::csvio;
use crate::error::{PipelineError, Result};
use crate::histogram::{ContributionMode, IngestOptions};
use crate::release;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReleaseMode {
    /// Partition keys only.
    #[default]
    Select,
    /// Thresholded truncated-geometric counts.
    ReleaseCounts,
    /// Counts with a separate threshold for public keys.
    Dual,
}

#[derive(Debug, Clone)]
pub struct SelectConfig {
    pub params: PrivacyParams,
    pub kappa: u32,
    pub mode: ReleaseMode,
    pub contribution: ContributionMode,
    pub cap: Option<u64>,
    pub seed: u64,
    pub public_keys: Option<BTreeSet<Vec<u8>>>,
    pub public_threshold: Option<i64>,
}

impl SelectConfig {
    pub fn new(params: PrivacyParams) -> Self {
        Self {
            params,
            kappa: 1,
            mode: ReleaseMode::Select,
            contribution: ContributionMode::Strict,
            cap: None,
            seed: 0,
            public_keys: None,
            public_threshold: None,
        }
    }

    /// Per-partition budget after splitting over `kappa`.
    pub fn partition_budget(&self) -> Result<PrivacyParams> {
        Ok(self.params.divided(self.kappa)?)
    }
}

/// Runs the pipeline on CSV input and returns the serialized output.
pub fn run_select<R: Read>(input: R, config: &SelectConfig) -> Result<Vec<u8>> {
    if config.kappa == 0 {
        return Err(PipelineError::config("kappa must be >= 1"));
    }
    let budget = config.partition_budget()?;
    let options = IngestOptions {
        mode: config.contribution,
        cap: config.cap,
        max_partitions_per_user: config.kappa as usize,
    };
    if config.mode != ReleaseMode::Dual
        && (config.public_keys.is_some() || config.public_threshold.is_some())
    {
        return Err(PipelineError::config(
            "public keys and public threshold only apply to dual mode",
        ));
    }
    let hist = csvio::read_histogram(input, options)?;
    let mut out = Vec::new();
    match config.mode {
        ReleaseMode::Select => {
            let prim = OptPrimitive::new(budget);
            let keys = release::select_partitions(&hist, &prim, config.seed)?;
            csvio::write_keys(&mut out, &keys)?;
        }
        ReleaseMode::ReleaseCounts => {
            let records = release::thresholded_release(&hist, &budget, config.seed)?;
            csvio::write_release(&mut out, &records)?;
        }
        ReleaseMode::Dual => {
            let public = config
                .public_keys
                .as_ref()
                .ok_or_else(|| PipelineError::config("dual mode needs a public key file"))?;
            let t = config
                .public_threshold
                .ok_or_else(|| PipelineError::config("dual mode needs a public threshold"))?;
            let records = release::dual_threshold_release(&hist, public, &budget, t, config.seed)?;
            csvio::write_release(&mut out, &records)?;
        }
    }
    Ok(out)
}
