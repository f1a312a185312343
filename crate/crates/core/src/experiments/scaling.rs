use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{QuenchConfig, TimeGrid};
use super::ensemble::ensemble_seeds;
use super::quench::run_quench;
use super::tg::TgEstimate;
use crate::error::{Error, Result};
use crate::observables::series::{mean, median};
use crate::spectra::{loglog_slope, ScalingFit};

/// Swept parameter of a scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingParameter {
    G,
    K,
}

/// Sample spacing of the auto-scaled time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HorizonSpacing {
    Linear { dt: f64 },
    Log { start: f64, count: usize },
}

/// Horizon `factor / p^exponent` for sweep value `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonRule {
    pub factor: f64,
    pub exponent: f64,
    pub spacing: HorizonSpacing,
}

impl HorizonRule {
    pub fn horizon(&self, p: f64) -> f64 {
        self.factor / p.powf(self.exponent)
    }

    pub fn grid(&self, p: f64) -> TimeGrid {
        let end = self.horizon(p);
        match self.spacing {
            HorizonSpacing::Linear { dt } => TimeGrid::linear(0.0, end, dt),
            HorizonSpacing::Log { start, count } => TimeGrid::log(start, end, count),
        }
    }
}

/// Equilibration-time statistics at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub param: f64,
    pub horizon: f64,
    /// Median and mean over uncensored realizations (`NaN` if none).
    pub tg_median: f64,
    pub tg_mean: f64,
    pub n_censored: usize,
    pub n_zero_peaks: usize,
    pub n_total: usize,
    /// More than half censored, or a non-positive median: excluded from the fit.
    pub flagged: bool,
    pub estimates: Vec<TgEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub parameter: ScalingParameter,
    pub rows: Vec<ScalingRow>,
    pub seeds: Vec<u64>,
    /// Power-law fit of the median over unflagged rows.
    pub fit: Option<ScalingFit>,
    pub fit_error: Option<String>,
}

fn row(param: f64, horizon: f64, estimates: Vec<TgEstimate>) -> ScalingRow {
    let done: Vec<f64> = estimates.iter().filter_map(|e| e.tg).collect();
    let n_total = estimates.len();
    let n_censored = estimates.iter().filter(|e| e.censored).count();
    let tg_median = if done.is_empty() {
        f64::NAN
    } else {
        median(&done)
    };
    ScalingRow {
        param,
        horizon,
        tg_median,
        tg_mean: if done.is_empty() {
            f64::NAN
        } else {
            mean(&done)
        },
        n_censored,
        n_zero_peaks: estimates.iter().filter(|e| e.zero_peaks).count(),
        n_total,
        flagged: 2 * n_censored > n_total || !(tg_median > 0.0),
        estimates,
    }
}

/// Equilibration time versus `g` or `k` over `realizations` per point.
///
/// Realization `i` uses the same seed at every grid point, so `r` and `r'`
/// are held fixed across the sweep. Each point runs on `horizon.grid(p)`.
pub fn tg_scaling_experiment(
    config: &QuenchConfig,
    parameter: ScalingParameter,
    grid: &[f64],
    realizations: usize,
    master_seed: u64,
    horizon: &HorizonRule,
) -> Result<ScalingResult> {
    if grid.len() < 4 {
        return Err(Error::config(
            "grid",
            format!("{} points, need at least 4", grid.len()),
        ));
    }
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::config("grid", format!("non-positive value {p}")));
    }
    if realizations == 0 {
        return Err(Error::config("realizations", "must be at least 1"));
    }
    let seeds = ensemble_seeds(master_seed, realizations);
    let mut base = config.clone();
    base.observables.entropy = false;
    base.observables.bath_correlation = false;

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|j| (0..realizations).map(move |i| (j, i)))
        .collect();
    let estimates = jobs
        .par_iter()
        .map(|&(j, i)| {
            let p = grid[j];
            let cfg = match parameter {
                ScalingParameter::G => base.with_g(p),
                ScalingParameter::K => base.with_k(p),
            }
            .with_seed(seeds[i])
            .with_time(horizon.grid(p));
            run_quench(&cfg)
                .map(|r| r.tg(&cfg))
                .map_err(|e| Error::GridPoint {
                    index: j,
                    source: Box::new(Error::Realization {
                        index: i,
                        source: Box::new(e),
                    }),
                })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<ScalingRow> = grid
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            row(
                p,
                horizon.horizon(p),
                estimates[j * realizations..(j + 1) * realizations].to_vec(),
            )
        })
        .collect();
    for r in rows.iter().filter(|r| r.flagged) {
        log::warn!(
            "grid point {} flagged: {}/{} censored, median {}",
            r.param,
            r.n_censored,
            r.n_total,
            r.tg_median
        );
    }
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| !r.flagged)
        .map(|r| (r.param, r.tg_median))
        .unzip();
    let window = (
        grid.iter().copied().fold(f64::INFINITY, f64::min),
        grid.iter().copied().fold(0.0, f64::max),
    );
    let (fit, fit_error) = match loglog_slope(&x, &y, Some(window)) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ScalingResult {
        parameter,
        rows,
        seeds,
        fit,
        fit_error,
    })
}
