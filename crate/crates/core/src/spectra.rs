//! Spectra as functions of a strength parameter, level tracking, gap
//! deviations, the product-basis coupling decomposition and power-law fits.

use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::spectral::degenerate_blocks;
use crate::engine::{diagonalize, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};
use crate::observables::TimeSeries;

/// Absolute gap below which two levels are treated as crossing.
pub const CROSSING_TOL: f64 = 1e-8;

/// Eigenvalues on a parameter grid, with optional eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectrumSweep {
    pub parameter: String,
    pub grid: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    /// Degenerate groups at the first grid point.
    pub manifolds: Vec<Range<usize>>,
    decompositions: Option<Vec<SpectralDecomposition>>,
}

impl SpectrumSweep {
    pub fn dim(&self) -> usize {
        self.eigenvalues[0].len()
    }

    pub fn decomposition(&self, j: usize) -> Option<&SpectralDecomposition> {
        self.decompositions.as_ref().map(|d| &d[j])
    }

    pub fn has_vectors(&self) -> bool {
        self.decompositions.is_some()
    }

    /// Sweep restricted to grid points `idx`, in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            parameter: self.parameter.clone(),
            grid: idx.iter().map(|&j| self.grid[j]).collect(),
            eigenvalues: idx.iter().map(|&j| self.eigenvalues[j].clone()).collect(),
            manifolds: degenerate_manifolds(
                &self.eigenvalues[idx[0]],
                crate::engine::spectral::DEGENERACY_RTOL,
            ),
            decompositions: self
                .decompositions
                .as_ref()
                .map(|d| idx.iter().map(|&j| d[j].clone()).collect()),
        }
    }
}

/// Diagonalizes `builder(p)` at every grid point. The builder must hold its
/// random realization fixed so that only the strength changes.
pub fn spectrum_sweep<F>(
    parameter: &str,
    grid: &[f64],
    builder: F,
    keep_vectors: bool,
) -> Result<SpectrumSweep>
where
    F: Fn(f64) -> Result<HermitianMatrix> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty sweep grid".into()));
    }
    if grid.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidSpec(
            "sweep grid must be finite and non-negative".into(),
        ));
    }
    let decomps = grid
        .par_iter()
        .enumerate()
        .map(|(j, &p)| {
            builder(p)
                .and_then(|h| diagonalize(&h))
                .map_err(|e| Error::GridPoint {
                    index: j,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let eigenvalues: Vec<Vec<f64>> = decomps.iter().map(|d| d.eigenvalues().to_vec()).collect();
    let manifolds = degenerate_manifolds(&eigenvalues[0], crate::engine::spectral::DEGENERACY_RTOL);
    Ok(SpectrumSweep {
        parameter: parameter.to_string(),
        grid: grid.to_vec(),
        eigenvalues,
        manifolds,
        decompositions: keep_vectors.then_some(decomps),
    })
}

/// Maximal runs whose consecutive gaps are below `tol * spectral range`.
pub fn degenerate_manifolds(eigenvalues: &[f64], tol: f64) -> Vec<Range<usize>> {
    degenerate_blocks(eigenvalues, tol)
}

/// Level identities across a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTracking {
    /// `index[j][i]`: position at grid point `j` of the level that sits at
    /// position `i` at grid point 0.
    pub index: Vec<Vec<usize>>,
    /// Grid points where a crossing could not be resolved.
    pub flagged: Vec<bool>,
}

fn close_groups(values: &[f64]) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] >= CROSSING_TOL {
            if i - start > 1 {
                groups.push(start..i);
            }
            start = i;
        }
    }
    groups
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn merge_ranges(mut ranges: Vec<Range<usize>>) -> Vec<Range<usize>> {
    ranges.sort_by_key(|r| r.start);
    let mut out: Vec<Range<usize>> = Vec::new();
    for r in ranges {
        match out.last_mut() {
            Some(last) if r.start < last.end => last.end = last.end.max(r.end),
            _ => out.push(r),
        }
    }
    out
}

/// Tracks levels between consecutive grid points.
///
/// Sorted order is continuous in the parameter, so it is the default
/// assignment. Near a crossing (levels within [`CROSSING_TOL`] at either
/// point) each level is matched by eigenvector overlap, using its vector
/// from the last grid point where it was not near-degenerate. Levels that
/// have been degenerate since the first grid point keep sorted order, which
/// labels a degenerate manifold by its order just after the origin. Without
/// stored vectors, crossings are flagged.
pub fn track_levels(sweep: &SpectrumSweep) -> LevelTracking {
    let n = sweep.dim();
    let mut index = vec![(0..n).collect::<Vec<usize>>()];
    let mut flagged = vec![false];
    let in_groups = |groups: &[Range<usize>], pos: usize| groups.iter().any(|g| g.contains(&pos));
    let mut refs: Vec<Option<nalgebra::DVector<C64>>> = vec![None; n];
    let first_groups = close_groups(&sweep.eigenvalues[0]);
    // degenerate at every grid point so far
    let mut locked: Vec<bool> = (0..n).map(|l| in_groups(&first_groups, l)).collect();
    if let Some(d) = sweep.decomposition(0) {
        for (l, r) in refs.iter_mut().enumerate() {
            if !in_groups(&first_groups, l) {
                *r = Some(d.eigenvector(l));
            }
        }
    }
    for j in 1..sweep.grid.len() {
        let prev = index[j - 1].clone();
        let mut label_at = vec![0usize; n];
        for (l, &p) in prev.iter().enumerate() {
            label_at[p] = l;
        }
        let mut next = prev.clone();
        let mut flag = false;
        let groups_now = close_groups(&sweep.eigenvalues[j]);
        let mut clusters = groups_now.clone();
        clusters.extend(close_groups(&sweep.eigenvalues[j - 1]));
        for c in merge_ranges(clusters) {
            let labels: Vec<usize> = c.clone().map(|p| label_at[p]).collect();
            if labels.iter().all(|&l| locked[l]) {
                continue;
            }
            let Some(d) = sweep.decomposition(j) else {
                flag = true;
                continue;
            };
            if labels.iter().any(|&l| refs[l].is_none()) || c.len() > 6 {
                flag = true;
                continue;
            }
            let size = c.len();
            let overlap = DMatrix::from_fn(size, size, |x, y| {
                refs[labels[x]]
                    .as_ref()
                    .expect("checked above")
                    .dotc(&d.eigenvector(c.start + y))
                    .norm_sqr()
            });
            let best = permutations(size)
                .into_iter()
                .map(|p| ((0..size).map(|x| overlap[(x, p[x])]).sum::<f64>(), p))
                .max_by(|x, y| x.0.total_cmp(&y.0))
                .expect("non-empty permutation set");
            for (x, &l) in labels.iter().enumerate() {
                next[l] = c.start + best.1[x];
            }
        }
        for (l, lock) in locked.iter_mut().enumerate() {
            *lock = *lock && in_groups(&groups_now, next[l]);
        }
        if let Some(d) = sweep.decomposition(j) {
            for (l, r) in refs.iter_mut().enumerate() {
                if !in_groups(&groups_now, next[l]) {
                    *r = Some(d.eigenvector(next[l]));
                }
            }
        }
        index.push(next);
        flagged.push(flag);
    }
    LevelTracking { index, flagged }
}

/// Whether the gap between levels `a < b` equals the gap of another pair
/// within `tol`.
pub fn is_gap_degenerate(eigenvalues: &[f64], a: usize, b: usize, tol: f64) -> bool {
    let gap = eigenvalues[b] - eigenvalues[a];
    let n = eigenvalues.len();
    (0..n).any(|c| {
        (c + 1..n)
            .any(|d| (c, d) != (a, b) && ((eigenvalues[d] - eigenvalues[c]) - gap).abs() < tol)
    })
}

/// `|Δ(p) − Δ(p₀)|` for the tracked pair `(a, b)` labelled at the first grid point.
///
/// Returns the series and, per point, whether the tracking was flagged.
pub fn gap_deviation(
    sweep: &SpectrumSweep,
    tracking: &LevelTracking,
    pair: (usize, usize),
    require_gap_degenerate: bool,
) -> Result<(TimeSeries, Vec<bool>)> {
    let (a, b) = pair;
    let n = sweep.dim();
    if a >= n || b >= n || a == b {
        return Err(Error::InvalidSpec(format!(
            "level pair ({a}, {b}) invalid for dimension {n}"
        )));
    }
    let e0 = &sweep.eigenvalues[0];
    let range = e0[n - 1] - e0[0];
    if require_gap_degenerate && !is_gap_degenerate(e0, a.min(b), a.max(b), 1e-10 * range.max(1.0))
    {
        return Err(Error::InvalidSpec(format!(
            "pair ({a}, {b}) is not gap-degenerate at the first grid point"
        )));
    }
    let gap0 = e0[b] - e0[a];
    let values = (0..sweep.grid.len())
        .map(|j| {
            let e = &sweep.eigenvalues[j];
            let idx = &tracking.index[j];
            ((e[idx[b]] - e[idx[a]]) - gap0).abs()
        })
        .collect();
    Ok((
        TimeSeries::new(sweep.grid.clone(), values, "gap_deviation")?,
        tracking.flagged.clone(),
    ))
}

/// Lowest levels of the first two degenerate manifolds of equal size.
///
/// In a spin–bath product the two manifolds are the same bath states dressed
/// by the two spin eigenstates, so their lowest members form a gap-degenerate
/// pair.
pub fn matched_manifold_pair(manifolds: &[Range<usize>]) -> Option<(usize, usize)> {
    let multi: Vec<&Range<usize>> = manifolds.iter().filter(|m| m.len() > 1).collect();
    multi.iter().enumerate().find_map(|(i, a)| {
        multi[i + 1..]
            .iter()
            .find(|b| b.len() == a.len())
            .map(|b| (a.start, b.start))
    })
}

/// Spread `max − min` of the tracked levels of `manifold` at each grid point.
pub fn manifold_widths(
    sweep: &SpectrumSweep,
    tracking: &LevelTracking,
    manifold: Range<usize>,
) -> Vec<f64> {
    (0..sweep.grid.len())
        .map(|j| {
            let e = &sweep.eigenvalues[j];
            let vals: Vec<f64> = manifold.clone().map(|i| e[tracking.index[j][i]]).collect();
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            max - min
        })
        .collect()
}

/// Upper level of `[[Δ0/2, g0], [g0, −Δ0/2]]`: `sqrt(Δ0²/4 + g0²)`.
pub fn two_level_avoided_crossing(delta0: f64, g0: f64) -> f64 {
    (0.25 * delta0 * delta0 + g0 * g0).sqrt()
}

/// A product-space coupling split into its part diagonal in the product
/// eigenbasis and the remainder, both in the original basis.
#[derive(Debug, Clone)]
pub struct CouplingDecomposition {
    pub diagonal: HermitianMatrix,
    pub residual: HermitianMatrix,
}

/// Splits `S ⊗ R` relative to the eigenbases of `H_sys` and `H_bath`.
pub fn coupling_decomposition(
    h_sys: &SpectralDecomposition,
    h_bath: &SpectralDecomposition,
    s: &HermitianMatrix,
    r: &HermitianMatrix,
) -> Result<CouplingDecomposition> {
    crate::linalg::check_dim(h_sys.dim(), s.dim())?;
    crate::linalg::check_dim(h_bath.dim(), r.dim())?;
    let u = h_sys.vectors().kronecker(&h_bath.vectors());
    let full = s.kron(r);
    let in_eig = u.ad_mul(full.matrix()) * &u;
    let n = in_eig.nrows();
    let diag_eig = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            in_eig[(i, i)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let diagonal = &u * diag_eig * u.adjoint();
    let residual = full.matrix() - &diagonal;
    Ok(CouplingDecomposition {
        diagonal: hermitize(diagonal)?,
        residual: hermitize(residual)?,
    })
}

fn hermitize(m: DMatrix<C64>) -> Result<HermitianMatrix> {
    let sym = (&m + m.adjoint()).unscale(2.0);
    if sym.iter().all(|z| z.im == 0.0) {
        HermitianMatrix::from_real(&sym.map(|z| z.re))
    } else {
        HermitianMatrix::new(sym)
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// The two smallest decades of the positive grid values.
pub fn default_window(x: &[f64]) -> (f64, f64) {
    let min = x
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    (min, min * 100.0)
}

/// Power-law fit on the points with `x` inside `window` (inclusive, with a
/// relative slack of 1e-9); defaults to [`default_window`].
pub fn loglog_slope(x: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<ScalingFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidFit(format!(
            "{} x values, {} y values",
            x.len(),
            y.len()
        )));
    }
    let window = window.unwrap_or_else(|| default_window(x));
    let (lo, hi) = (window.0 * (1.0 - 1e-9), window.1 * (1.0 + 1e-9));
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&xi, _)| xi >= lo && xi <= hi)
        .map(|(&xi, &yi)| (xi, yi))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InvalidFit(format!(
            "{} points in window, need at least 4",
            pts.len()
        )));
    }
    if let Some(&(xi, yi)) = pts.iter().find(|(xi, yi)| !(*xi > 0.0 && *yi > 0.0)) {
        return Err(Error::InvalidFit(format!(
            "non-positive point ({xi}, {yi}) in window"
        )));
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = pts.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidFit("all x values identical".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|v| (v - my) * (v - my)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        window,
        points: pts.len(),
    })
}
