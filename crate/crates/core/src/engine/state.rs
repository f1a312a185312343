use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

/// Norm tolerance for a valid pure state.
pub const NORM_TOL: f64 = 1e-10;

/// Orthonormality tolerance for a fresh orbital ensemble.
pub const GRAM_TOL: f64 = 1e-10;

/// Which basis the amplitudes of a [`PureState`] refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    /// Lattice sites.
    Site,
    /// Spin ⊗ single-particle sites, spin index major.
    SpinSite,
    /// Spin ⊗ fixed-number Fock states, spin index major.
    SpinFock,
}

impl BasisTag {
    pub fn has_spin(self) -> bool {
        !matches!(self, BasisTag::Site)
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
    basis: BasisTag,
}

impl PureState {
    /// Wraps `amplitudes`, requiring `‖ψ‖ = 1 ± 1e-10`.
    pub fn new(amplitudes: DVector<C64>, basis: BasisTag) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, basis })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: DVector<C64>, basis: BasisTag) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState(format!(
                "cannot normalize vector of norm {norm}"
            )));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
            basis,
        })
    }

    pub fn from_real(amplitudes: &DVector<f64>, basis: BasisTag) -> Result<Self> {
        Self::new(amplitudes.map(|x| C64::new(x, 0.0)), basis)
    }

    pub fn basis_vector(dim: usize, index: usize, basis: BasisTag) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} >= dimension {dim}"
            )));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(Self {
            amplitudes: v,
            basis,
        })
    }

    /// Bypasses the norm check; used for states produced by unitary maps.
    pub(crate) fn from_unitary_image(amplitudes: DVector<C64>, basis: BasisTag) -> Self {
        Self { amplitudes, basis }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        crate::linalg::check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density_matrix(&self) -> DMatrix<C64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Non-interacting many-particle state given by one orbital per particle.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalEnsemble {
    orbitals: Vec<PureState>,
    system_orbital: Option<usize>,
}

impl OrbitalEnsemble {
    /// Builds an ensemble of site-basis orbitals that are orthonormal to 1e-10.
    pub fn new(orbitals: Vec<PureState>, system_orbital: Option<usize>) -> Result<Self> {
        let ens = Self::unchecked(orbitals, system_orbital)?;
        let dev = ens.gram_deviation();
        if dev > GRAM_TOL {
            return Err(Error::InvalidState(format!(
                "orbitals are not orthonormal: max |G - I| = {dev:e}"
            )));
        }
        Ok(ens)
    }

    pub(crate) fn unchecked(
        orbitals: Vec<PureState>,
        system_orbital: Option<usize>,
    ) -> Result<Self> {
        if orbitals.is_empty() {
            return Err(Error::InvalidState("orbital ensemble is empty".into()));
        }
        let dim = orbitals[0].dim();
        for o in &orbitals {
            if o.basis() != BasisTag::Site {
                return Err(Error::InvalidState(
                    "orbitals must be in the site basis".into(),
                ));
            }
            crate::linalg::check_dim(dim, o.dim())?;
        }
        if let Some(s) = system_orbital {
            if s >= orbitals.len() {
                return Err(Error::InvalidState(format!(
                    "system orbital {s} out of range"
                )));
            }
        }
        Ok(Self {
            orbitals,
            system_orbital,
        })
    }

    pub fn orbitals(&self) -> &[PureState] {
        &self.orbitals
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.orbitals[0].dim()
    }

    pub fn system_orbital(&self) -> Option<&PureState> {
        self.system_orbital.map(|i| &self.orbitals[i])
    }

    pub fn system_orbital_index(&self) -> Option<usize> {
        self.system_orbital
    }

    /// Overlap matrix `G_ab = ⟨φ_a|φ_b⟩`.
    pub fn gram(&self) -> DMatrix<C64> {
        let n = self.orbitals.len();
        DMatrix::from_fn(n, n, |a, b| {
            self.orbitals[a]
                .amplitudes()
                .dotc(self.orbitals[b].amplitudes())
        })
    }

    pub fn gram_deviation(&self) -> f64 {
        let g = self.gram();
        let n = g.nrows();
        (g - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}
