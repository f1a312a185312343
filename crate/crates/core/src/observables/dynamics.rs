use nalgebra::{DMatrix, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measures::{trace_distance, trace_distance4};
use super::rdm::{fold_occupancy, spin_rdm_of_mixture};
use super::series::TimeSeries;
use crate::engine::{
    dephased_components, spinor_pair, BathFilling, DephaseMode, OrbitalEnsemble, PureState,
    SpectralDecomposition,
};
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};

/// Reading of the bath correlation function.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    /// `|⟨b|e^{-iHt}|b⟩|` with `b = Bψ0 / ‖Bψ0‖`.
    #[default]
    StateOverlap,
    /// `|Tr[B B(t)]| / Tr[B²]` with `B(t) = e^{iHt} B e^{-iHt}`.
    HilbertSchmidt,
}

/// Correlation of the joining operator with itself over `times`.
pub fn bath_correlation(
    decomp: &SpectralDecomposition,
    b: &HermitianMatrix,
    psi0: &PureState,
    times: &[f64],
    kind: CorrelationKind,
) -> Result<TimeSeries> {
    crate::linalg::check_dim(decomp.dim(), b.dim())?;
    let bpsi = b.apply(psi0.amplitudes())?;
    let norm = bpsi.norm();
    if norm <= 1e-12 {
        return Err(Error::UndefinedCorrelation(norm));
    }
    let energies = decomp.eigenvalues();
    let values: Vec<f64> = match kind {
        CorrelationKind::StateOverlap => {
            let c = decomp.to_energy_basis(&bpsi.unscale(norm))?;
            let weights: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
            times
                .par_iter()
                .map(|&t| {
                    let mut acc = C64::new(0.0, 0.0);
                    for (w, &e) in weights.iter().zip(energies) {
                        let (s, co) = (e * t).sin_cos();
                        acc += C64::new(co, -s) * *w;
                    }
                    acc.norm()
                })
                .collect()
        }
        CorrelationKind::HilbertSchmidt => {
            let v = decomp.vectors();
            let be = v.ad_mul(b.matrix()) * &v;
            let n = decomp.dim();
            let weights = DMatrix::from_fn(n, n, |l, m| be[(l, m)].norm_sqr());
            let total: f64 = weights.iter().sum();
            times
                .par_iter()
                .map(|&t| {
                    let phases: Vec<C64> = energies
                        .iter()
                        .map(|&e| {
                            let (s, c) = (e * t).sin_cos();
                            C64::new(c, s)
                        })
                        .collect();
                    let mut acc = C64::new(0.0, 0.0);
                    for m in 0..n {
                        let pm = phases[m].conj();
                        for l in 0..n {
                            acc += phases[l] * pm * weights[(l, m)];
                        }
                    }
                    acc.norm() / total
                })
                .collect()
        }
    };
    TimeSeries::new(times.to_vec(), values, "bath_corr")
}

/// Trace distance between the spin states of the dephased pair.
pub fn long_time_mean_estimate(
    decomp: &SpectralDecomposition,
    psi: &PureState,
    psi_p: &PureState,
    mode: DephaseMode,
) -> Result<f64> {
    let a = spin_rdm_of_mixture(&dephased_components(decomp, psi, mode)?)?;
    let b = spin_rdm_of_mixture(&dephased_components(decomp, psi_p, mode)?)?;
    trace_distance(&a, &b)
}

/// Occupancy matrix of an ensemble whose orbitals are each replaced by
/// their dephased single-particle density matrix.
///
/// Only the system-site coherence survives, so this is the long-time
/// state of the [`OccupancyCoherence::SystemSites`](super::rdm::OccupancyCoherence::SystemSites) construction.
pub fn dephased_occupancy(
    decomp: &SpectralDecomposition,
    ensemble: &OrbitalEnsemble,
    system_sites: (usize, usize),
    mode: DephaseMode,
) -> Result<Matrix4<C64>> {
    let (a, b) = system_sites;
    let mats = ensemble
        .orbitals()
        .iter()
        .map(|o| {
            let comps = dephased_components(decomp, o, mode)?;
            let mut block = [[C64::new(0.0, 0.0); 2]; 2];
            for u in &comps {
                let s = [u[a], u[b]];
                for i in 0..2 {
                    for j in 0..2 {
                        block[i][j] += s[i] * s[j].conj();
                    }
                }
            }
            let mut m = Matrix4::from_element(C64::new(0.0, 0.0));
            m[(1, 1)] = block[0][0];
            m[(1, 2)] = block[0][1];
            m[(2, 1)] = block[1][0];
            m[(2, 2)] = block[1][1];
            m[(3, 3)] = C64::new(1.0 - block[0][0].re - block[1][1].re, 0.0);
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    fold_occupancy(&mats)
}

/// Long-time estimate for paired orbital ensembles on a 2D lattice.
pub fn long_time_mean_estimate_orbitals(
    decomp: &SpectralDecomposition,
    ensemble: &OrbitalEnsemble,
    ensemble_p: &OrbitalEnsemble,
    system_sites: (usize, usize),
    mode: DephaseMode,
) -> Result<f64> {
    let a = dephased_occupancy(decomp, ensemble, system_sites, mode)?;
    let b = dephased_occupancy(decomp, ensemble_p, system_sites, mode)?;
    Ok(trace_distance4(&a, &b))
}

/// Long-time estimate for spin pairs with Bloch vectors `±(cos θ, 0, sin θ)`.
pub fn angle_scan(
    decomp: &SpectralDecomposition,
    filling: &BathFilling,
    thetas: &[f64],
    mode: DephaseMode,
) -> Result<TimeSeries> {
    let values = thetas
        .par_iter()
        .map(|&theta| {
            let (a, b) = spinor_pair(theta);
            long_time_mean_estimate(decomp, &filling.with_spin(a)?, &filling.with_spin(b)?, mode)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(thetas.to_vec(), values, "long_time_estimate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{diagonalize, BasisTag};
    use crate::linalg::{sigma_z, HermitianMatrix};
    use nalgebra::DVector;

    fn spin_state(a: f64, b: f64) -> PureState {
        PureState::normalized(
            DVector::from_vec(vec![C64::new(a, 0.0), C64::new(b, 0.0)]),
            BasisTag::SpinSite,
        )
        .unwrap()
    }

    #[test]
    fn bare_qubit_estimates() {
        let d = diagonalize(&sigma_z()).unwrap();
        let e = long_time_mean_estimate(
            &d,
            &spin_state(1.0, 1.0),
            &spin_state(1.0, -1.0),
            DephaseMode::Eigenvectors,
        )
        .unwrap();
        assert!(e.abs() < 1e-15);
        let e = long_time_mean_estimate(
            &d,
            &spin_state(1.0, 0.0),
            &spin_state(0.0, 1.0),
            DephaseMode::Eigenvectors,
        )
        .unwrap();
        assert!((e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn correlation_starts_at_one() {
        let h = HermitianMatrix::from_real(&DMatrix::from_fn(4, 4, |i, j| {
            if i.abs_diff(j) == 1 {
                1.0
            } else {
                0.0
            }
        }))
        .unwrap();
        let d = diagonalize(&h).unwrap();
        let b =
            HermitianMatrix::from_real(&DMatrix::from_fn(
                4,
                4,
                |i, j| if i + j == 1 { 1.0 } else { 0.0 },
            ))
            .unwrap();
        let psi = PureState::basis_vector(4, 0, BasisTag::Site).unwrap();
        for kind in [
            CorrelationKind::StateOverlap,
            CorrelationKind::HilbertSchmidt,
        ] {
            let c = bath_correlation(&d, &b, &psi, &[0.0, 1.0], kind).unwrap();
            assert!((c.values()[0] - 1.0).abs() < 1e-12);
            assert!(c.values()[1] < 1.0);
        }
    }

    #[test]
    fn correlation_undefined_for_annihilated_state() {
        let d = diagonalize(&HermitianMatrix::identity(3)).unwrap();
        let b =
            HermitianMatrix::from_real(&DMatrix::from_fn(
                3,
                3,
                |i, j| if i + j == 3 { 1.0 } else { 0.0 },
            ))
            .unwrap();
        let psi = PureState::basis_vector(3, 0, BasisTag::Site).unwrap();
        assert!(matches!(
            bath_correlation(&d, &b, &psi, &[0.0], CorrelationKind::StateOverlap),
            Err(Error::UndefinedCorrelation(_))
        ));
    }
}
