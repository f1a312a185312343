use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled trajectory of a real observable on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    label: String,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSeries("empty series".into()));
        }
        if times.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSeries(format!(
                "times not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(i) = times.iter().chain(&values).position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite entry at position {i}"
            )));
        }
        Ok(Self {
            times,
            values,
            label: label.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Indices of samples with `start <= t <= end`.
    pub fn window_indices(&self, start: f64, end: f64) -> std::ops::Range<usize> {
        let lo = self.times.partition_point(|&t| t < start);
        let hi = self.times.partition_point(|&t| t <= end);
        lo..hi.max(lo)
    }

    /// Values with `start <= t <= end`.
    pub fn window(&self, start: f64, end: f64) -> &[f64] {
        &self.values[self.window_indices(start, end)]
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn std(&self) -> f64 {
        std_dev(&self.values)
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation.
pub fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Total increase of `d` over the samples in `[t, t + dt]`:
/// `Σ max(D_{i+1} − D_i, 0)` over consecutive samples inside the window.
pub fn nm_measure(d: &TimeSeries, t: f64, dt: f64) -> Result<f64> {
    let end = t + dt;
    if !(dt >= 0.0) || t < d.first_time() || end > d.last_time() {
        return Err(Error::WindowOutOfRange {
            start: t,
            end,
            first: d.first_time(),
            last: d.last_time(),
        });
    }
    let w = d.window(t, end);
    Ok(w.windows(2).map(|p| (p[1] - p[0]).max(0.0)).sum())
}
