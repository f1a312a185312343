use serde::{Deserialize, Serialize};

use crate::observables::TimeSeries;

/// Outcome of an equilibration-time extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TgEstimate {
    /// Extracted time; `None` when censored.
    pub tg: Option<f64>,
    pub censored: bool,
    /// No reconstruction peak at all (peak definition only); `tg` is 0.
    pub zero_peaks: bool,
    pub n_peaks: usize,
}

impl TgEstimate {
    fn censored(n_peaks: usize) -> Self {
        Self {
            tg: None,
            censored: true,
            zero_peaks: false,
            n_peaks,
        }
    }
}

/// First sample time at which `D < threshold` holds for `persistence`
/// consecutive samples. Censored when no such run fits in the series.
pub fn extract_tg_threshold(d: &TimeSeries, threshold: f64, persistence: usize) -> TgEstimate {
    let persistence = persistence.max(1);
    let mut run = 0;
    for (i, &v) in d.values().iter().enumerate() {
        if v < threshold {
            run += 1;
            if run == persistence {
                return TgEstimate {
                    tg: Some(d.times()[i + 1 - persistence]),
                    censored: false,
                    zero_peaks: false,
                    n_peaks: 0,
                };
            }
        } else {
            run = 0;
        }
    }
    TgEstimate::censored(0)
}

/// Indices of reconstruction peaks: 3-point local maxima above
/// `peak_threshold`, counted only after `D` first drops below it.
pub fn reconstruction_peaks(d: &TimeSeries, peak_threshold: f64) -> Vec<usize> {
    let v = d.values();
    let Some(start) = v.iter().position(|&x| x < peak_threshold) else {
        return Vec::new();
    };
    (start.max(1)..v.len().saturating_sub(1))
        .filter(|&i| v[i] > peak_threshold && v[i] >= v[i - 1] && v[i] > v[i + 1])
        .collect()
}

/// Time of the last reconstruction peak.
///
/// Censored when the last peak lies beyond `baseline_quantile` of the
/// horizon, i.e. peaks have not stopped by the end of the series. Without
/// any peak the estimate is 0 and `zero_peaks` is set.
pub fn extract_tg_peaks(d: &TimeSeries, peak_threshold: f64, baseline_quantile: f64) -> TgEstimate {
    let peaks = reconstruction_peaks(d, peak_threshold);
    let Some(&last) = peaks.last() else {
        return TgEstimate {
            tg: Some(0.0),
            censored: false,
            zero_peaks: true,
            n_peaks: 0,
        };
    };
    let t0 = d.first_time();
    let cutoff = t0 + baseline_quantile * (d.last_time() - t0);
    let t = d.times()[last];
    if t > cutoff {
        return TgEstimate::censored(peaks.len());
    }
    TgEstimate {
        tg: Some(t),
        censored: false,
        zero_peaks: false,
        n_peaks: peaks.len(),
    }
}
