//! O(n) reference construction of the optimal primitive.
//!
//! Each value is the largest one allowed by the DP constraints given the
//! previous value. This is an independent route to the closed form in
//! [`crate::primitive`] and is meant for verification, not production use.

use alloc::vec::Vec;

use libm::exp;

use crate::error::{Error, Result};
use crate::params::PrivacyParams;

/// Largest `n` the recursion will walk to.
pub const MAX_RECURSIVE_N: u64 = 10_000_000;

/// Which argument of the recurrence's `min` produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `e^eps * pi(n-1) + delta`
    Growth,
    /// `1 - e^-eps * (1 - pi(n-1) - delta)`
    Approach,
    /// The cap at one.
    Saturated,
}

/// Values `pi(0..=n_max)` together with the branch that produced each.
#[derive(Debug, Clone)]
pub struct RecursiveTrace {
    pub values: Vec<f64>,
    /// `branches[i]` is the branch for `values[i + 1]`.
    pub branches: Vec<Branch>,
}

impl RecursiveTrace {
    /// Last `n` produced by the growth branch (0 if none).
    pub fn growth_end(&self) -> u64 {
        self.branches
            .iter()
            .rposition(|b| *b == Branch::Growth)
            .map_or(0, |i| i as u64 + 1)
    }

    /// First `n` with value one, if reached.
    pub fn saturation_index(&self) -> Option<u64> {
        self.values.iter().position(|v| *v >= 1.0).map(|i| i as u64)
    }
}

/// One step of the recurrence.
pub fn step(eps: f64, delta: f64, prev: f64) -> (f64, Branch) {
    let growth = exp(eps) * prev + delta;
    let approach = 1.0 - exp(-eps) * (1.0 - prev - delta);
    if growth <= approach && growth < 1.0 {
        (growth, Branch::Growth)
    } else if approach < 1.0 {
        (approach, Branch::Approach)
    } else {
        (1.0, Branch::Saturated)
    }
}

pub fn trace(params: &PrivacyParams, n_max: u64) -> Result<RecursiveTrace> {
    if n_max > MAX_RECURSIVE_N {
        return Err(Error::OracleRange {
            n: n_max,
            max: MAX_RECURSIVE_N,
        });
    }
    let eps = params.effective_epsilon();
    let delta = params.effective_delta();
    let mut values = Vec::with_capacity(n_max as usize + 1);
    let mut branches = Vec::with_capacity(n_max as usize);
    values.push(0.0);
    let mut prev = 0.0;
    for _ in 0..n_max {
        let (v, b) = step(eps, delta, prev);
        values.push(v);
        branches.push(b);
        prev = v;
    }
    Ok(RecursiveTrace { values, branches })
}

/// `pi(n)` by walking the recurrence from zero.
pub fn pi_opt_recursive(params: &PrivacyParams, n: u64) -> Result<f64> {
    Ok(*trace(params, n)?.values.last().expect("nonempty"))
}
