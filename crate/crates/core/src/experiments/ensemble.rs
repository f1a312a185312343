use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::QuenchConfig;
use super::quench::run_quench;
use super::tg::TgEstimate;
use crate::error::{Error, Result};
use crate::model::realization_seed;
use crate::observables::series::{mean, median, std_dev};
use crate::observables::{nm_measure, TimeSeries};

/// Trace-distance trajectories of many realizations on one time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub seeds: Vec<u64>,
    pub series: Vec<TimeSeries>,
    pub mean_series: TimeSeries,
    /// Mean over realizations of the standard deviation over time.
    pub m_sigma: f64,
    /// Standard deviation over time of the mean series.
    pub sigma_m: f64,
    pub tg: Vec<TgEstimate>,
    /// Mean and median over uncensored realizations; `None` if all are censored.
    pub tg_mean: Option<f64>,
    pub tg_median: Option<f64>,
    pub n_censored: usize,
}

impl EnsembleResult {
    /// Assembles the statistics from per-realization series.
    pub fn from_series(
        seeds: Vec<u64>,
        series: Vec<TimeSeries>,
        tg: Vec<TgEstimate>,
    ) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::InvalidSeries("ensemble has no realizations".into()))?;
        if series.iter().any(|s| s.times() != first.times()) {
            return Err(Error::InvalidSeries(
                "realizations on different time grids".into(),
            ));
        }
        let n = series.len() as f64;
        let values: Vec<f64> = (0..first.len())
            .map(|i| series.iter().map(|s| s.values()[i]).sum::<f64>() / n)
            .collect();
        let mean_series = TimeSeries::new(first.times().to_vec(), values, "mean_trace_distance")?;
        let (m_sigma, sigma_m) = window_stats(&series, &mean_series, 0..first.len());
        let done: Vec<f64> = tg.iter().filter_map(|e| e.tg).collect();
        let n_censored = tg.iter().filter(|e| e.censored).count();
        Ok(Self {
            seeds,
            mean_series,
            m_sigma,
            sigma_m,
            tg_mean: (!done.is_empty()).then(|| mean(&done)),
            tg_median: (!done.is_empty()).then(|| median(&done)),
            n_censored,
            tg,
            series,
        })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// `(M_σ, σ_M)` restricted to samples with `start <= t <= end`.
    pub fn window_statistics(&self, start: f64, end: f64) -> Result<(f64, f64)> {
        let idx = self.mean_series.window_indices(start, end);
        if idx.is_empty() {
            return Err(Error::WindowOutOfRange {
                start,
                end,
                first: self.mean_series.first_time(),
                last: self.mean_series.last_time(),
            });
        }
        Ok(window_stats(&self.series, &self.mean_series, idx))
    }
}

fn window_stats(
    series: &[TimeSeries],
    mean_series: &TimeSeries,
    idx: std::ops::Range<usize>,
) -> (f64, f64) {
    let per: Vec<f64> = series
        .iter()
        .map(|s| std_dev(&s.values()[idx.clone()]))
        .collect();
    (mean(&per), std_dev(&mean_series.values()[idx]))
}

/// Deterministic per-realization seeds for `count` realizations.
pub fn ensemble_seeds(master_seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| realization_seed(master_seed, i))
        .collect()
}

/// Runs `count >= 2` realizations with seeds derived from `master_seed`.
///
/// Only the trace distance is recorded. Realizations run in parallel and
/// are collected in index order, so the result does not depend on the
/// number of worker threads.
pub fn ensemble_run(
    config: &QuenchConfig,
    count: usize,
    master_seed: u64,
) -> Result<EnsembleResult> {
    if count < 2 {
        return Err(Error::config("realizations", format!("{count} < 2")));
    }
    ensemble_from_seeds(config, &ensemble_seeds(master_seed, count))
}

/// Runs one realization per entry of `seeds`.
pub fn ensemble_from_seeds(config: &QuenchConfig, seeds: &[u64]) -> Result<EnsembleResult> {
    config.validate()?;
    let mut base = config.clone();
    base.observables.entropy = false;
    base.observables.bath_correlation = false;
    let runs = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| {
            let cfg = base.with_seed(seed);
            run_quench(&cfg)
                .map(|r| {
                    let tg = r.tg(&cfg);
                    (r.trace_distance, tg)
                })
                .map_err(|e| Error::Realization {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let (series, tg): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    EnsembleResult::from_series(seeds.to_vec(), series, tg)
}

/// Non-Markovianity measure of one window, per realization and of the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmWindow {
    pub start: f64,
    pub dt: f64,
    pub per_realization: Vec<f64>,
    pub mean_of_measure: f64,
    pub measure_of_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmReport {
    pub early: NmWindow,
    pub late: NmWindow,
}

fn nm_window(ensemble: &EnsembleResult, start: f64, dt: f64) -> Result<NmWindow> {
    let per = ensemble
        .series
        .iter()
        .map(|s| nm_measure(s, start, dt))
        .collect::<Result<Vec<_>>>()?;
    Ok(NmWindow {
        start,
        dt,
        mean_of_measure: mean(&per),
        measure_of_mean: nm_measure(&ensemble.mean_series, start, dt)?,
        per_realization: per,
    })
}

/// Mean of the per-realization measure and measure of the mean series on
/// `[early, early + dt]` and `[late, late + dt]`.
pub fn nm_window_comparison(
    ensemble: &EnsembleResult,
    early: f64,
    late: f64,
    dt: f64,
) -> Result<NmReport> {
    Ok(NmReport {
        early: nm_window(ensemble, early, dt)?,
        late: nm_window(ensemble, late, dt)?,
    })
}
