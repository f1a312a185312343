use nalgebra::{DMatrix, DVector};

use super::fock::{slater_amplitudes, FockBasis};
use super::spectral::{degenerate_blocks, diagonalize, DEGENERACY_RTOL};
use super::state::{BasisTag, OrbitalEnsemble, PureState};
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};
use crate::model::{ConnectedMode, LatticeSpec};

fn to_complex(v: nalgebra::DVectorView<'_, f64>) -> DVector<C64> {
    v.map(|x| C64::new(x, 0.0))
}

fn log_if_fermi_degenerate(energies: &[f64], filled: usize, what: &str, level: log::Level) {
    if filled == 0 || filled >= energies.len() {
        return;
    }
    let blocks = degenerate_blocks(energies, DEGENERACY_RTOL);
    if blocks.iter().any(|b| b.start < filled && b.end > filled) {
        log::log!(
            level,
            "{what}: Fermi level at {:.6} is degenerate; filling the lowest-index orbitals",
            energies[filled - 1]
        );
    }
}

/// Paired initial ensembles of a disconnected 2D lattice.
///
/// The dimer and bath blocks of `pre_quench` are diagonalized separately.
/// Both ensembles hold the lowest `⌊N_bath / 2⌋` bath orbitals; `ψ` adds the
/// lower dimer eigenstate and `ψ′` the upper one. The dimer orbital is stored
/// first and marked as the system orbital.
pub fn prepare_initial_pair_2d(
    pre_quench: &HermitianMatrix,
    spec: &LatticeSpec,
) -> Result<(OrbitalEnsemble, OrbitalEnsemble)> {
    spec.validate()?;
    if !spec.geometry.is_2d() {
        return Err(Error::WrongBuilder(
            "prepare_initial_pair_2d needs a 2D lattice".into(),
        ));
    }
    let n = spec.n_sites;
    crate::linalg::check_dim(n, pre_quench.dim())?;
    let (sa, sb) = spec.system_sites;
    let bath = spec.bath_sites();
    for &s in &[sa, sb] {
        for &j in &bath {
            if pre_quench.get(s, j).norm() != 0.0 {
                return Err(Error::InvalidState(format!(
                    "pre-quench Hamiltonian couples system site {s} to bath site {j}"
                )));
            }
        }
    }

    let sys = [sa, sb];
    let dimer = HermitianMatrix::new(DMatrix::from_fn(2, 2, |i, j| {
        pre_quench.get(sys[i], sys[j])
    }))?;
    let dimer = diagonalize(&dimer)?;
    let embed_dimer = |l: usize| {
        let v = dimer.eigenvector(l);
        let mut full = DVector::from_element(n, C64::new(0.0, 0.0));
        full[sa] = v[0];
        full[sb] = v[1];
        PureState::new(full, BasisTag::Site)
    };

    let nb = bath.len();
    let bath_h = HermitianMatrix::new(DMatrix::from_fn(nb, nb, |i, j| {
        pre_quench.get(bath[i], bath[j])
    }))?;
    let bath_d = diagonalize(&bath_h)?;
    let filled = nb / 2;
    log_if_fermi_degenerate(bath_d.eigenvalues(), filled, "2D bath", log::Level::Warn);
    let bath_orbitals = (0..filled)
        .map(|l| {
            let v = bath_d.eigenvector(l);
            let mut full = DVector::from_element(n, C64::new(0.0, 0.0));
            for (k, &site) in bath.iter().enumerate() {
                full[site] = v[k];
            }
            PureState::new(full, BasisTag::Site)
        })
        .collect::<Result<Vec<_>>>()?;

    let make = |sys_orbital: PureState| {
        let mut orbitals = Vec::with_capacity(filled + 1);
        orbitals.push(sys_orbital);
        orbitals.extend(bath_orbitals.iter().cloned());
        OrbitalEnsemble::new(orbitals, Some(0))
    };
    Ok((make(embed_dimer(0)?)?, make(embed_dimer(1)?)?))
}

/// Bath part of the connected-model initial state: the filled lowest
/// orbitals of a bath hopping matrix, as site amplitudes (one particle) or
/// Slater-determinant Fock amplitudes (many particles).
#[derive(Debug, Clone, PartialEq)]
pub struct BathFilling {
    pub amplitudes: DVector<C64>,
    pub basis: BasisTag,
}

impl BathFilling {
    pub fn new(bath: &DMatrix<f64>, mode: ConnectedMode) -> Result<Self> {
        let n = bath.nrows();
        let d = diagonalize(&HermitianMatrix::from_real(bath)?)?;
        let v = d.real_vectors().expect("real input keeps real vectors");
        match mode {
            ConnectedMode::SingleParticle => {
                log_if_fermi_degenerate(d.eigenvalues(), 1, "connected bath", log::Level::Debug);
                Ok(Self {
                    amplitudes: to_complex(v.column(0)),
                    basis: BasisTag::SpinSite,
                })
            }
            ConnectedMode::ManyBody { particles } => {
                if particles == 0 || particles > n {
                    return Err(Error::InvalidState(format!(
                        "{particles} particles on {n} sites"
                    )));
                }
                log_if_fermi_degenerate(
                    d.eigenvalues(),
                    particles,
                    "connected bath",
                    log::Level::Debug,
                );
                let basis = FockBasis::new(n, particles)?;
                let orbitals: Vec<_> = (0..particles).map(|l| to_complex(v.column(l))).collect();
                let amps = slater_amplitudes(&orbitals, &basis)?;
                let norm = amps.norm();
                if (norm - 1.0).abs() > 1e-10 {
                    return Err(Error::Numerical(format!("Slater determinant norm {norm}")));
                }
                Ok(Self {
                    amplitudes: amps,
                    basis: BasisTag::SpinFock,
                })
            }
        }
    }

    /// `spinor ⊗ bath`, spin index major.
    pub fn with_spin(&self, spinor: [C64; 2]) -> Result<PureState> {
        let d = self.amplitudes.len();
        let amps = DVector::from_fn(2 * d, |i, _| spinor[i / d] * self.amplitudes[i % d]);
        PureState::new(amps, self.basis)
    }
}

pub const SPIN_UP: [C64; 2] = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
pub const SPIN_DOWN: [C64; 2] = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];

/// Orthogonal spinor pair with Bloch vectors `±(cos θ, 0, sin θ)`.
///
/// `θ = π/2` gives `(|+z⟩, |−z⟩)`.
pub fn spinor_pair(theta: f64) -> ([C64; 2], [C64; 2]) {
    let half_polar = 0.5 * (std::f64::consts::FRAC_PI_2 - theta);
    let (s, c) = half_polar.sin_cos();
    (
        [C64::new(c, 0.0), C64::new(s, 0.0)],
        [C64::new(-s, 0.0), C64::new(c, 0.0)],
    )
}

/// `(|+z⟩ ⊗ Φ, |−z⟩ ⊗ Φ)` with `Φ` the filled bath of `bath`.
pub fn prepare_initial_pair_connected(
    bath: &DMatrix<f64>,
    mode: ConnectedMode,
) -> Result<(PureState, PureState)> {
    let filling = BathFilling::new(bath, mode)?;
    Ok((filling.with_spin(SPIN_UP)?, filling.with_spin(SPIN_DOWN)?))
}
