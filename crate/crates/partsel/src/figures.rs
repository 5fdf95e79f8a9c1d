//! Figure data: release-probability curves, percentile/midpoint grids and
//! the kappa comparison. Everything here is closed-form and deterministic.

use std::io::Write;
use std::str::FromStr;

use partsel_core::baselines::{GaussianPrimitive, LaplacePrimitive};
use partsel_core::{percentile_n, OptPrimitive, PrivacyParams, SelectionPrimitive};
use rayon::prelude::*;

use crate::error::{PipelineError, Result};

/// Default number of grid points per axis.
pub const GRID_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Opt,
    Laplace,
    Gauss,
}

impl FromStr for Strategy {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opt" => Ok(Strategy::Opt),
            "laplace" => Ok(Strategy::Laplace),
            "gauss" => Ok(Strategy::Gauss),
            other => Err(PipelineError::config(format!("unknown strategy `{other}`"))),
        }
    }
}

/// A primitive for `strategy`. Opt and Laplace split the budget evenly over
/// `kappa` partitions; Gauss calibrates for L2 sensitivity `sqrt(kappa)`.
pub fn build_strategy(
    strategy: Strategy,
    params: &PrivacyParams,
    kappa: u32,
) -> Result<Box<dyn SelectionPrimitive + Send + Sync>> {
    Ok(match strategy {
        Strategy::Opt => Box::new(OptPrimitive::new(params.divided(kappa)?)),
        Strategy::Laplace => Box::new(LaplacePrimitive::new(&params.divided(kappa)?)?),
        Strategy::Gauss => Box::new(GaussianPrimitive::new(params, kappa)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    ProbCurve,
    MidpointVsEps,
    MidpointVsDelta,
    KappaCompare,
}

impl FromStr for FigureId {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prob-curve" => Ok(FigureId::ProbCurve),
            "midpoint-vs-eps" => Ok(FigureId::MidpointVsEps),
            "midpoint-vs-delta" => Ok(FigureId::MidpointVsDelta),
            "kappa-compare" => Ok(FigureId::KappaCompare),
            other => Err(PipelineError::config(format!("unknown figure `{other}`"))),
        }
    }
}

/// Grids for one figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub id: FigureId,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub kappa_max: u32,
    pub n_max: u64,
}

impl FigureSpec {
    /// Percentiles against epsilon in `[0.01, 3]` at `delta`.
    pub fn midpoint_vs_eps(delta: f64) -> Self {
        Self {
            id: FigureId::MidpointVsEps,
            epsilons: log_space(0.01, 3.0, GRID_POINTS),
            deltas: vec![delta],
            kappa_max: 1,
            n_max: 0,
        }
    }

    /// Percentiles against delta in `[1e-12, 1e-3]` at `epsilon`.
    pub fn midpoint_vs_delta(epsilon: f64) -> Self {
        Self {
            id: FigureId::MidpointVsDelta,
            epsilons: vec![epsilon],
            deltas: log_space(1e-12, 1e-3, GRID_POINTS),
            kappa_max: 1,
            n_max: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.deltas.is_empty() {
            return Err(PipelineError::config("figure grids must be nonempty"));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(PipelineError::config("figure epsilons must be positive"));
        }
        if self.deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(PipelineError::config("figure deltas must lie in (0, 1)"));
        }
        if self.kappa_max == 0 {
            return Err(PipelineError::config("kappa range must be nonempty"));
        }
        Ok(())
    }
}

/// `points` values evenly spaced in log scale from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == points - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (points - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `(n, prob)` rows for `n` in `0..=n_max`.
pub fn prob_curve(
    strategy: Strategy,
    params: &PrivacyParams,
    kappa: u32,
    n_max: u64,
) -> Result<Vec<(u64, f64)>> {
    let prim = build_strategy(strategy, params, kappa)?;
    Ok((0..=n_max).map(|n| (n, prim.prob(n))).collect())
}

pub fn write_prob_curve<W: Write>(mut out: W, rows: &[(u64, f64)]) -> Result<()> {
    writeln!(out, "n,prob")?;
    for (n, p) in rows {
        writeln!(out, "{n},{p}")?;
    }
    Ok(())
}

/// 5th, 50th and 95th percentile counts for the optimal and Laplace
/// primitives at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointRow {
    pub key: f64,
    pub opt: [u64; 3],
    pub lap: [u64; 3],
}

const QUANTILES: [f64; 3] = [0.05, 0.5, 0.95];

fn percentiles<P: SelectionPrimitive + ?Sized>(prim: &P) -> Result<[u64; 3]> {
    let mut out = [0; 3];
    for (slot, q) in out.iter_mut().zip(QUANTILES) {
        *slot = percentile_n(prim, q)
            .ok_or_else(|| PipelineError::config(format!("percentile {q} not reached")))?;
    }
    Ok(out)
}

pub fn midpoint_row(key: f64, params: &PrivacyParams) -> Result<MidpointRow> {
    Ok(MidpointRow {
        key,
        opt: percentiles(&OptPrimitive::new(*params))?,
        lap: percentiles(&LaplacePrimitive::new(params)?)?,
    })
}

/// Rows for a midpoint figure, keyed by epsilon or delta.
pub fn midpoint_rows(spec: &FigureSpec) -> Result<Vec<MidpointRow>> {
    spec.validate()?;
    let grid: Vec<(f64, f64, f64)> = match spec.id {
        FigureId::MidpointVsEps => {
            let d = spec.deltas[0];
            spec.epsilons.iter().map(|&e| (e, e, d)).collect()
        }
        FigureId::MidpointVsDelta => {
            let e = spec.epsilons[0];
            spec.deltas.iter().map(|&d| (d, e, d)).collect()
        }
        other => {
            return Err(PipelineError::config(format!(
                "{other:?} is not a midpoint figure"
            )))
        }
    };
    grid.into_par_iter()
        .map(|(key, e, d)| midpoint_row(key, &PrivacyParams::add_remove(e, d)?))
        .collect()
}

pub fn write_midpoints<W: Write>(mut out: W, id: FigureId, rows: &[MidpointRow]) -> Result<()> {
    let key = if id == FigureId::MidpointVsDelta {
        "del"
    } else {
        "eps"
    };
    writeln!(out, "{key},opt05,opt50,opt95,lap05,lap50,lap95")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.key, r.opt[0], r.opt[1], r.opt[2], r.lap[0], r.lap[1], r.lap[2]
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KappaRow {
    pub kappa: u32,
    pub opt_mid: u64,
    pub lap_mid: u64,
    pub gauss_mid: u64,
}

fn midpoint_of(strategy: Strategy, params: &PrivacyParams, kappa: u32) -> Result<u64> {
    let prim = build_strategy(strategy, params, kappa)?;
    percentile_n(prim.as_ref(), 0.5).ok_or_else(|| PipelineError::config("midpoint not reached"))
}

pub fn kappa_rows(params: &PrivacyParams, kappa_max: u32) -> Result<Vec<KappaRow>> {
    if kappa_max == 0 {
        return Err(PipelineError::config("kappa range must be nonempty"));
    }
    (1..=kappa_max)
        .into_par_iter()
        .map(|kappa| {
            Ok(KappaRow {
                kappa,
                opt_mid: midpoint_of(Strategy::Opt, params, kappa)?,
                lap_mid: midpoint_of(Strategy::Laplace, params, kappa)?,
                gauss_mid: midpoint_of(Strategy::Gauss, params, kappa)?,
            })
        })
        .collect()
}

pub fn write_kappa<W: Write>(mut out: W, rows: &[KappaRow]) -> Result<()> {
    writeln!(out, "kappa,opt_mid,lap_mid,gauss_mid")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.kappa, r.opt_mid, r.lap_mid, r.gauss_mid
        )?;
    }
    Ok(())
}
