//! Reduced density matrices: the spin state of the connected model and the
//! two-site occupancy state of the 2D lattices.
//!
//! Occupancy index classes (zero-based): `0` both system sites occupied,
//! `1` first site only, `2` second site only, `3` neither.

use nalgebra::{DMatrix, Matrix4};
use serde::{Deserialize, Serialize};

use crate::engine::{OrbitalEnsemble, PureState};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, max_asymmetry, C64};

pub const RDM_HERMITIAN_TOL: f64 = 1e-10;
pub const RDM_TRACE_TOL: f64 = 1e-9;
/// Eigenvalues below `-EIGEN_FLOOR` make a state invalid.
pub const EIGEN_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RdmLabel {
    Spin,
    Occupancy,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    entries: DMatrix<C64>,
    label: RdmLabel,
}

impl ReducedDensityMatrix {
    /// Validates Hermiticity, unit trace and positivity up to the floor.
    pub fn new(entries: DMatrix<C64>, label: RdmLabel) -> Result<Self> {
        let rdm = Self::new_unchecked(entries, label)?;
        rdm.check_positive()?;
        Ok(rdm)
    }

    /// Checks shape, Hermiticity and trace but not positivity.
    pub fn new_unchecked(entries: DMatrix<C64>, label: RdmLabel) -> Result<Self> {
        if !entries.is_square() || entries.is_empty() {
            return Err(Error::InvalidDimension(format!(
                "density matrix is {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let asym = max_asymmetry(&entries);
        if asym > RDM_HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
                tolerance: RDM_HERMITIAN_TOL,
            });
        }
        let tr: f64 = entries.diagonal().iter().map(|z| z.re).sum();
        if (tr - 1.0).abs() > RDM_TRACE_TOL {
            return Err(Error::InvalidState(format!("density matrix trace {tr}")));
        }
        Ok(Self { entries, label })
    }

    pub fn check_positive(&self) -> Result<()> {
        let min = self.eigenvalues()[0];
        if min < -EIGEN_FLOOR {
            return Err(Error::InvalidState(format!(
                "density matrix eigenvalue {min:e} below floor"
            )));
        }
        Ok(())
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn label(&self) -> RdmLabel {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub(crate) fn from_matrix4(m: &Matrix4<C64>) -> Self {
        Self {
            entries: DMatrix::from_fn(4, 4, |i, j| m[(i, j)]),
            label: RdmLabel::Occupancy,
        }
    }

    pub(crate) fn to_matrix4(&self) -> Result<Matrix4<C64>> {
        if self.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: self.dim(),
            });
        }
        Ok(Matrix4::from_fn(|i, j| self.entries[(i, j)]))
    }
}

fn spin_rdm_raw(amps: &nalgebra::DVector<C64>) -> DMatrix<C64> {
    let d = amps.len() / 2;
    let (up, down) = (amps.rows(0, d), amps.rows(d, d));
    DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(up.norm_squared(), 0.0),
            up.dotc(&down).conj(),
            up.dotc(&down),
            C64::new(down.norm_squared(), 0.0),
        ],
    )
}

/// `ρ_ab = Σ_q ψ_{a,q} conj(ψ_{b,q})` for a spin ⊗ bath state.
pub fn spin_rdm(psi: &PureState) -> Result<ReducedDensityMatrix> {
    if !psi.basis().has_spin() {
        return Err(Error::InvalidState(
            "spin_rdm needs a spin ⊗ bath state".into(),
        ));
    }
    ReducedDensityMatrix::new(spin_rdm_raw(psi.amplitudes()), RdmLabel::Spin)
}

/// Spin block of `Σ_u |u⟩⟨u|` for unnormalized spin ⊗ bath vectors.
pub fn spin_rdm_of_mixture(components: &[nalgebra::DVector<C64>]) -> Result<ReducedDensityMatrix> {
    let mut acc = DMatrix::from_element(2, 2, C64::new(0.0, 0.0));
    for u in components {
        if u.len() % 2 != 0 {
            return Err(Error::InvalidState("odd-length spin ⊗ bath vector".into()));
        }
        acc += spin_rdm_raw(u);
    }
    ReducedDensityMatrix::new(acc, RdmLabel::Spin)
}

/// How coherences enter a single-orbital occupancy matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupancyCoherence {
    /// Coherence only between the two system sites; the bath class is a
    /// population. Always a valid density matrix.
    #[default]
    SystemSites,
    /// Class populations on the diagonal and products of class amplitude
    /// sums off the diagonal, bath class included. Not positive in general.
    ClassSums,
}

/// Amplitude data needed for one orbital's occupancy matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalAmplitudes {
    pub site1: C64,
    pub site2: C64,
    /// Sum of the amplitudes over bath sites (class-sum coherence only).
    pub bath_sum: C64,
    /// Total weight on bath sites.
    pub bath_weight: f64,
}

impl OrbitalAmplitudes {
    pub fn from_state(phi: &PureState, system_sites: (usize, usize)) -> Result<Self> {
        let (a, b) = system_sites;
        let n = phi.dim();
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidSpec(format!(
                "system sites ({a}, {b}) invalid for {n} sites"
            )));
        }
        let amps = phi.amplitudes();
        let mut bath_sum = C64::new(0.0, 0.0);
        let mut bath_weight = 0.0;
        for (i, z) in amps.iter().enumerate() {
            if i != a && i != b {
                bath_sum += z;
                bath_weight += z.norm_sqr();
            }
        }
        Ok(Self {
            site1: amps[a],
            site2: amps[b],
            bath_sum,
            bath_weight,
        })
    }
}

/// Single-orbital occupancy matrix from amplitude data.
pub fn occupancy_from_amplitudes(
    amps: &OrbitalAmplitudes,
    coherence: OccupancyCoherence,
) -> Matrix4<C64> {
    let mut rho = Matrix4::from_element(C64::new(0.0, 0.0));
    let s = [amps.site1, amps.site2, amps.bath_sum];
    rho[(1, 1)] = C64::new(amps.site1.norm_sqr(), 0.0);
    rho[(2, 2)] = C64::new(amps.site2.norm_sqr(), 0.0);
    rho[(3, 3)] = C64::new(amps.bath_weight, 0.0);
    rho[(1, 2)] = s[0] * s[1].conj();
    rho[(2, 1)] = s[1] * s[0].conj();
    if coherence == OccupancyCoherence::ClassSums {
        for (i, &zi) in s.iter().enumerate() {
            for (j, &zj) in s.iter().enumerate() {
                if i != j {
                    rho[(i + 1, j + 1)] = zi * zj.conj();
                }
            }
        }
    }
    rho
}

/// Occupancy matrix of a single-particle orbital on the two system sites.
pub fn orbital_occupancy_rdm(
    phi: &PureState,
    system_sites: (usize, usize),
    coherence: OccupancyCoherence,
) -> Result<ReducedDensityMatrix> {
    let amps = OrbitalAmplitudes::from_state(phi, system_sites)?;
    let m = occupancy_from_amplitudes(&amps, coherence);
    let rdm = ReducedDensityMatrix::from_matrix4(&m);
    ReducedDensityMatrix::new_unchecked(rdm.entries, RdmLabel::Occupancy)
}

/// One entry `(class, p, q, weight)` of the combination tensor.
pub type BEntry = (usize, usize, usize, f64);

/// Combination tensor `B_i^{pq}` as printed, zero-based.
///
/// `B_0` contains `(0, 0)` twice: once from each of its two sums over `k`.
pub const B_TENSOR: [BEntry; 16] = [
    (0, 1, 2, 1.0),
    (0, 2, 1, 1.0),
    (0, 0, 0, 2.0),
    (0, 0, 1, 1.0),
    (0, 0, 2, 1.0),
    (0, 0, 3, 1.0),
    (0, 1, 0, 1.0),
    (0, 2, 0, 1.0),
    (0, 3, 0, 1.0),
    (1, 1, 1, 1.0),
    (1, 1, 3, 1.0),
    (1, 3, 1, 1.0),
    (2, 2, 2, 1.0),
    (2, 2, 3, 1.0),
    (2, 3, 2, 1.0),
    (3, 3, 3, 1.0),
];

/// `ρ[i][j] = Σ B_i^{pq} B_j^{rs} ρ1[p][r] ρ2[q][s]`, renormalized to unit trace.
pub fn combine_matrix4(rho1: &Matrix4<C64>, rho2: &Matrix4<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::from_element(C64::new(0.0, 0.0));
    for &(i, p, q, w1) in &B_TENSOR {
        for &(j, r, s, w2) in &B_TENSOR {
            out[(i, j)] += rho1[(p, r)] * rho2[(q, s)] * (w1 * w2);
        }
    }
    let tr: f64 = (0..4).map(|i| out[(i, i)].re).sum();
    if (tr - 1.0).abs() > 1e-12 {
        log::debug!("combined occupancy trace {tr}; renormalizing");
    }
    if tr > 0.0 {
        out /= C64::new(tr, 0.0);
    }
    out
}

/// Combines two occupancy matrices with the B tensor.
pub fn combine_rdm(
    rho1: &ReducedDensityMatrix,
    rho2: &ReducedDensityMatrix,
) -> Result<ReducedDensityMatrix> {
    let m = combine_matrix4(&rho1.to_matrix4()?, &rho2.to_matrix4()?);
    Ok(ReducedDensityMatrix::from_matrix4(&m))
}

/// Left fold of [`combine_rdm`] over the orbitals of `ensemble`, in stored order.
pub fn occupancy_rdm(
    ensemble: &OrbitalEnsemble,
    system_sites: (usize, usize),
    coherence: OccupancyCoherence,
) -> Result<ReducedDensityMatrix> {
    let mats = ensemble
        .orbitals()
        .iter()
        .map(|o| {
            OrbitalAmplitudes::from_state(o, system_sites)
                .map(|a| occupancy_from_amplitudes(&a, coherence))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = fold_occupancy(&mats)?;
    ReducedDensityMatrix::new_unchecked(
        ReducedDensityMatrix::from_matrix4(&m).entries,
        RdmLabel::Occupancy,
    )
}

/// Left fold of [`combine_matrix4`].
pub fn fold_occupancy(mats: &[Matrix4<C64>]) -> Result<Matrix4<C64>> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::InvalidState("empty orbital ensemble".into()))?;
    Ok(rest.iter().fold(*first, |acc, m| combine_matrix4(&acc, m)))
}
