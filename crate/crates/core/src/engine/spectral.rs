use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{OrbitalEnsemble, PureState};
use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, hermitian_eigenvalues, real_mul_complex, real_tr_mul_complex, HermitianMatrix, C64,
};

/// Relative gap below which neighbouring eigenvalues are treated as degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-10;

const MAX_SWEEPS_PER_DIM: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
enum Vectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Vectors,
}

/// Full eigendecomposition. Real symmetric input keeps real eigenvectors.
pub fn diagonalize(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidDimension(
            "cannot diagonalize an empty matrix".into(),
        ));
    }
    let max_iter = MAX_SWEEPS_PER_DIM * n.max(16);
    if h.is_real() {
        let eig = SymmetricEigen::try_new(h.real_part(), f64::EPSILON, max_iter)
            .ok_or_else(|| Error::Numerical(format!("eigensolver did not converge (n = {n})")))?;
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = eig.eigenvectors.select_columns(order.iter());
        Ok(SpectralDecomposition {
            eigenvalues: values,
            vectors: Vectors::Real(vectors),
        })
    } else {
        let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, max_iter)
            .ok_or_else(|| Error::Numerical(format!("eigensolver did not converge (n = {n})")))?;
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = eig.eigenvectors.select_columns(order.iter());
        Ok(SpectralDecomposition {
            eigenvalues: values,
            vectors: Vectors::Complex(vectors),
        })
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_real(&self) -> bool {
        matches!(self.vectors, Vectors::Real(_))
    }

    /// Real eigenvector matrix, when the input was real symmetric.
    pub fn real_vectors(&self) -> Option<&DMatrix<f64>> {
        match &self.vectors {
            Vectors::Real(v) => Some(v),
            Vectors::Complex(_) => None,
        }
    }

    /// Eigenvector matrix `V` (columns are eigenvectors).
    pub fn vectors(&self) -> DMatrix<C64> {
        match &self.vectors {
            Vectors::Real(v) => v.map(|x| C64::new(x, 0.0)),
            Vectors::Complex(v) => v.clone(),
        }
    }

    pub fn eigenvector(&self, l: usize) -> DVector<C64> {
        match &self.vectors {
            Vectors::Real(v) => v.column(l).map(|x| C64::new(x, 0.0)),
            Vectors::Complex(v) => v.column(l).into_owned(),
        }
    }

    pub fn spectral_range(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    /// Coefficients `V† ψ` in the energy basis.
    pub fn to_energy_basis(&self, psi: &DVector<C64>) -> Result<DVector<C64>> {
        check_dim(self.dim(), psi.len())?;
        Ok(match &self.vectors {
            Vectors::Real(v) => real_tr_mul_complex(v, psi),
            Vectors::Complex(v) => v.ad_mul(psi),
        })
    }

    /// `V c`.
    pub fn from_energy_basis(&self, c: &DVector<C64>) -> Result<DVector<C64>> {
        check_dim(self.dim(), c.len())?;
        Ok(match &self.vectors {
            Vectors::Real(v) => real_mul_complex(v, c),
            Vectors::Complex(v) => v * c,
        })
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let v = self.vectors();
        let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&e| C64::new(e, 0.0)),
        ));
        &v * lambda * v.adjoint()
    }

    /// `max |V†V − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let v = self.vectors();
        let n = self.dim();
        (v.ad_mul(&v) - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Index ranges of degenerate groups at relative tolerance `rtol`.
    pub fn degenerate_blocks(&self, rtol: f64) -> Vec<Range<usize>> {
        degenerate_blocks(&self.eigenvalues, rtol)
    }

    /// `|ψ(t)⟩ = V e^{-iΛt} V† |ψ0⟩`.
    pub fn propagator(&self, psi0: &PureState) -> Result<Propagator<'_>> {
        let coeffs = self.to_energy_basis(psi0.amplitudes())?;
        Ok(Propagator {
            decomp: self,
            coeffs,
            basis: psi0.basis(),
        })
    }
}

/// Maximal runs of ascending `values` whose consecutive gaps are below
/// `rtol * (max − min)`.
pub fn degenerate_blocks(values: &[f64], rtol: f64) -> Vec<Range<usize>> {
    if values.is_empty() {
        return Vec::new();
    }
    let range = values[values.len() - 1] - values[0];
    let tol = rtol * range;
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        let gap = values[i] - values[i - 1];
        if gap >= tol && gap > 0.0 {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks.push(start..values.len());
    blocks
}

/// Pre-projected state ready for evaluation at many times.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    decomp: &'a SpectralDecomposition,
    coeffs: DVector<C64>,
    basis: super::state::BasisTag,
}

impl Propagator<'_> {
    pub fn energy_coefficients(&self) -> &DVector<C64> {
        &self.coeffs
    }

    pub fn at(&self, t: f64) -> PureState {
        let phased = phase(&self.coeffs, self.decomp.eigenvalues(), t);
        let amps = self
            .decomp
            .from_energy_basis(&phased)
            .expect("dimension fixed at construction");
        PureState::from_unitary_image(amps, self.basis)
    }
}

fn phase(c: &DVector<C64>, energies: &[f64], t: f64) -> DVector<C64> {
    DVector::from_iterator(
        c.len(),
        c.iter().zip(energies).map(|(z, &e)| {
            let (s, co) = (e * t).sin_cos();
            z * C64::new(co, -s)
        }),
    )
}

/// `ψ(t) = V e^{-iΛt} V† ψ0`.
pub fn evolve(decomp: &SpectralDecomposition, psi0: &PureState, t: f64) -> Result<PureState> {
    if t == 0.0 {
        check_dim(decomp.dim(), psi0.dim())?;
        return Ok(psi0.clone());
    }
    Ok(decomp.propagator(psi0)?.at(t))
}

/// Evolves to every time in `times`, in parallel; output order follows `times`.
pub fn evolve_many(
    decomp: &SpectralDecomposition,
    psi0: &PureState,
    times: &[f64],
) -> Result<Vec<PureState>> {
    let prop = decomp.propagator(psi0)?;
    Ok(times
        .par_iter()
        .map(|&t| if t == 0.0 { psi0.clone() } else { prop.at(t) })
        .collect())
}

/// Evolves each orbital of `ensemble` independently.
pub fn evolve_orbitals(
    decomp: &SpectralDecomposition,
    ensemble: &OrbitalEnsemble,
    t: f64,
) -> Result<OrbitalEnsemble> {
    let orbitals = ensemble
        .orbitals()
        .iter()
        .map(|o| evolve(decomp, o, t))
        .collect::<Result<Vec<_>>>()?;
    OrbitalEnsemble::unchecked(orbitals, ensemble.system_orbital_index())
}

/// Evaluates fixed linear functionals `w_r · ψ_s(t)` of several evolving
/// states without forming the full state vectors.
///
/// With `W` the `k × dim` functional matrix and `C` the `dim × n` matrix of
/// energy-basis coefficients, the value at time `t` is `(W V) e^{-iΛt} C`.
#[derive(Debug, Clone)]
pub struct ProjectedPropagator {
    energies: Vec<f64>,
    projected_rows: DMatrix<C64>,
    coeffs: DMatrix<C64>,
}

impl ProjectedPropagator {
    pub fn new(
        decomp: &SpectralDecomposition,
        functionals: &DMatrix<C64>,
        states: &[PureState],
    ) -> Result<Self> {
        check_dim(decomp.dim(), functionals.ncols())?;
        if states.is_empty() {
            return Err(Error::InvalidState("no states to propagate".into()));
        }
        let projected_rows = match &decomp.vectors {
            Vectors::Real(v) => {
                let re = functionals.map(|z| z.re) * v;
                let im = functionals.map(|z| z.im) * v;
                re.zip_map(&im, C64::new)
            }
            Vectors::Complex(v) => functionals * v,
        };
        let n = decomp.dim();
        let mut coeffs = DMatrix::zeros(n, states.len());
        for (s, psi) in states.iter().enumerate() {
            coeffs.set_column(s, &decomp.to_energy_basis(psi.amplitudes())?);
        }
        Ok(Self {
            energies: decomp.eigenvalues.clone(),
            projected_rows,
            coeffs,
        })
    }

    /// Matrix of values, rows indexed by functional, columns by state.
    pub fn at(&self, t: f64) -> DMatrix<C64> {
        let mut rows = self.projected_rows.clone();
        for (l, &e) in self.energies.iter().enumerate() {
            let (s, c) = (e * t).sin_cos();
            let p = C64::new(c, -s);
            for z in rows.column_mut(l).iter_mut() {
                *z *= p;
            }
        }
        rows * &self.coeffs
    }
}

/// How the dephasing projection treats degenerate eigenvalues.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephaseMode {
    /// Project onto each computed eigenvector.
    #[default]
    Eigenvectors,
    /// Project onto whole degenerate eigenspaces.
    DegenerateBlocks,
}

fn check_density_matrix(rho: &DMatrix<C64>) -> Result<()> {
    let h = HermitianMatrix::new(rho.clone())?;
    let tr = h.trace();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "density matrix has trace {tr}"
        )));
    }
    let min = hermitian_eigenvalues(rho)[0];
    if min < -1e-9 {
        return Err(Error::InvalidState(format!(
            "density matrix has eigenvalue {min}"
        )));
    }
    Ok(())
}

/// Removes every energy-basis coherence of `rho`.
pub fn dephase(
    decomp: &SpectralDecomposition,
    rho: &DMatrix<C64>,
    mode: DephaseMode,
) -> Result<DMatrix<C64>> {
    check_dim(decomp.dim(), rho.nrows())?;
    check_density_matrix(rho)?;
    let v = decomp.vectors();
    let mut in_energy = v.ad_mul(rho) * &v;
    let n = decomp.dim();
    let block_of = block_labels(decomp, mode);
    for i in 0..n {
        for j in 0..n {
            if block_of[i] != block_of[j] {
                in_energy[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(&v * in_energy * v.adjoint())
}

fn block_labels(decomp: &SpectralDecomposition, mode: DephaseMode) -> Vec<usize> {
    match mode {
        DephaseMode::Eigenvectors => (0..decomp.dim()).collect(),
        DephaseMode::DegenerateBlocks => {
            let mut labels = vec![0; decomp.dim()];
            for (b, r) in decomp
                .degenerate_blocks(DEGENERACY_RTOL)
                .into_iter()
                .enumerate()
            {
                for i in r {
                    labels[i] = b;
                }
            }
            labels
        }
    }
}

/// Dephased pure state as a sum of unnormalized components,
/// `ρ_∞ = Σ_b |u_b⟩⟨u_b|` with `u_b = P_b ψ`.
pub fn dephased_components(
    decomp: &SpectralDecomposition,
    psi: &PureState,
    mode: DephaseMode,
) -> Result<Vec<DVector<C64>>> {
    let c = decomp.to_energy_basis(psi.amplitudes())?;
    let blocks: Vec<Range<usize>> = match mode {
        DephaseMode::Eigenvectors => (0..decomp.dim()).map(|l| l..l + 1).collect(),
        DephaseMode::DegenerateBlocks => decomp.degenerate_blocks(DEGENERACY_RTOL),
    };
    blocks
        .into_iter()
        .map(|r| {
            let mut masked = DVector::from_element(c.len(), C64::new(0.0, 0.0));
            for i in r {
                masked[i] = c[i];
            }
            decomp.from_energy_basis(&masked)
        })
        .collect()
}
