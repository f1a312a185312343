use nalgebra::{DMatrix, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{FillBasis, ModelConfig, QuenchConfig};
use super::tg::{extract_tg_peaks, extract_tg_threshold, TgEstimate};
use crate::engine::{
    diagonalize, prepare_initial_pair_2d, prepare_initial_pair_connected, OrbitalEnsemble,
    ProjectedPropagator, SpectralDecomposition,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, C64};
use crate::model::{
    build_2d_pair, build_connected_hamiltonian, connected_bath_matrix, coupling_seed,
    joining_operator, ConnectedMode, CouplingTerm, LatticeSpec, SymBreakTerm,
};
use crate::observables::measures::{entropy_of_eigenvalues, trace_distance4};
use crate::observables::rdm::{fold_occupancy, occupancy_from_amplitudes, OrbitalAmplitudes};
use crate::observables::{
    bath_correlation, spin_rdm, trace_distance, von_neumann_entropy, OccupancyCoherence, TimeSeries,
};

/// Series recorded by one paired quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchResult {
    pub trace_distance: TimeSeries,
    /// Entropy of the `ψ` trajectory.
    pub entropy: Option<TimeSeries>,
    pub bath_corr: Option<TimeSeries>,
    pub seed: u64,
}

impl QuenchResult {
    /// Equilibration time under the definition suited to the model:
    /// last reconstruction peak for lattices, persistent threshold crossing
    /// for the connected model.
    pub fn tg(&self, config: &QuenchConfig) -> TgEstimate {
        let p = config.tg;
        if config.model.is_lattice() {
            extract_tg_peaks(&self.trace_distance, p.peak_threshold, p.baseline_quantile)
        } else {
            extract_tg_threshold(&self.trace_distance, p.threshold, p.persistence)
        }
    }
}

/// Runs the quench selected by `config.model`.
pub fn run_quench(config: &QuenchConfig) -> Result<QuenchResult> {
    if config.model.is_lattice() {
        run_torus_quench(config)
    } else {
        run_connected_quench(config)
    }
}

fn to_dmatrix(m: &Matrix4<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

/// Occupancy matrices of a paired 2D ensemble at arbitrary times.
///
/// Both ensembles share their bath orbitals, so those are propagated once.
/// Only the amplitudes on the two system sites (and, for class-sum
/// coherence, the summed bath amplitude) are ever formed.
struct PairedOccupancy {
    prop: ProjectedPropagator,
    n_bath: usize,
    coherence: OccupancyCoherence,
}

impl PairedOccupancy {
    fn new(
        decomp: &SpectralDecomposition,
        ens: &OrbitalEnsemble,
        ens_p: &OrbitalEnsemble,
        spec: &LatticeSpec,
        coherence: OccupancyCoherence,
    ) -> Result<Self> {
        let n = spec.n_sites;
        let (a, b) = spec.system_sites;
        let rows = if coherence == OccupancyCoherence::ClassSums {
            3
        } else {
            2
        };
        let functionals = DMatrix::from_fn(rows, n, |r, j| {
            let on = match r {
                0 => j == a,
                1 => j == b,
                _ => j != a && j != b,
            };
            C64::new(if on { 1.0 } else { 0.0 }, 0.0)
        });
        let mut states = vec![ens.orbitals()[0].clone(), ens_p.orbitals()[0].clone()];
        states.extend(ens.orbitals()[1..].iter().cloned());
        Ok(Self {
            prop: ProjectedPropagator::new(decomp, &functionals, &states)?,
            n_bath: ens.len() - 1,
            coherence,
        })
    }

    fn matrix(&self, values: &DMatrix<C64>, col: usize) -> Matrix4<C64> {
        let (s1, s2) = (values[(0, col)], values[(1, col)]);
        let amps = OrbitalAmplitudes {
            site1: s1,
            site2: s2,
            bath_sum: if values.nrows() > 2 {
                values[(2, col)]
            } else {
                C64::new(0.0, 0.0)
            },
            bath_weight: (1.0 - s1.norm_sqr() - s2.norm_sqr()).max(0.0),
        };
        occupancy_from_amplitudes(&amps, self.coherence)
    }

    /// `(ρ(ψ(t)), ρ(ψ′(t)))`, each folded in stored orbital order.
    fn at(&self, t: f64) -> Result<(Matrix4<C64>, Matrix4<C64>)> {
        let v = self.prop.at(t);
        let bath: Vec<_> = (0..self.n_bath).map(|i| self.matrix(&v, i + 2)).collect();
        let fold = |sys: Matrix4<C64>| {
            let mut mats = Vec::with_capacity(bath.len() + 1);
            mats.push(sys);
            mats.extend_from_slice(&bath);
            fold_occupancy(&mats)
        };
        Ok((fold(self.matrix(&v, 0))?, fold(self.matrix(&v, 1))?))
    }
}

/// Paired quench of a 2D lattice: the dimer is joined to the half-filled
/// bath at `t = 0`, and `D` compares the occupancy matrices of the two
/// system sites for the bonding and antibonding initial dimer orbitals.
pub fn run_torus_quench(config: &QuenchConfig) -> Result<QuenchResult> {
    config.validate()?;
    let ModelConfig::Lattice { spec } = &config.model else {
        return Err(Error::WrongBuilder(
            "run_torus_quench needs a lattice model".into(),
        ));
    };
    let times = config.time.times()?;
    let sym = SymBreakTerm::sample(spec.n_sites, config.g, config.seed)?;
    let pair = build_2d_pair(spec, &sym)?;
    let (ens, ens_p) = prepare_initial_pair_2d(&pair.pre_quench, spec)?;
    let decomp = diagonalize(&pair.post_quench)?;
    let obs = config.observables;
    let tracker = PairedOccupancy::new(&decomp, &ens, &ens_p, spec, obs.coherence)?;

    let rows = times
        .par_iter()
        .map(|&t| {
            let (rho, rho_p) = tracker.at(t)?;
            let d = trace_distance4(&rho, &rho_p);
            let s = if obs.entropy {
                entropy_of_eigenvalues(&hermitian_eigenvalues(&to_dmatrix(&rho)))?
            } else {
                0.0
            };
            Ok((d, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let (d, s): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();

    let bath_corr = if obs.bath_correlation {
        let b = joining_operator(spec, &sym, None, ConnectedMode::SingleParticle)?;
        let psi0 = ens.system_orbital().expect("dimer orbital is marked");
        Some(bath_correlation(
            &decomp,
            &b,
            psi0,
            &times,
            obs.correlation_kind,
        )?)
    } else {
        None
    };
    Ok(QuenchResult {
        trace_distance: TimeSeries::new(times.clone(), d, "trace_distance")?,
        entropy: if obs.entropy {
            Some(TimeSeries::new(times, s, "vn_entropy")?)
        } else {
            None
        },
        bath_corr,
        seed: config.seed,
    })
}

/// Paired quench of the spin–bath model: `|±z⟩ ⊗ Φ` evolve under the
/// Hamiltonian with the coupling switched on, and `D` compares the spin
/// states. `r` is drawn from `config.seed` and `r'` from its derived seed.
pub fn run_connected_quench(config: &QuenchConfig) -> Result<QuenchResult> {
    config.validate()?;
    let ModelConfig::Connected {
        spec,
        mode,
        k,
        fill_basis,
        ..
    } = &config.model
    else {
        return Err(Error::WrongBuilder(
            "run_connected_quench needs the connected model".into(),
        ));
    };
    let options = config.model.connected_options();
    let times = config.time.times()?;
    let sym = SymBreakTerm::sample(spec.n_sites, config.g, config.seed)?;
    let coup = CouplingTerm::sample(spec.m, *k, coupling_seed(config.seed))?;
    let pair = build_connected_hamiltonian(spec, &sym, &coup, *mode, options)?;
    let fill_sym = match fill_basis {
        FillBasis::Unperturbed => sym.with_strength(0.0),
        FillBasis::Perturbed => sym.clone(),
    };
    let bath = connected_bath_matrix(spec, &fill_sym, options)?;
    let (psi, psi_p) = prepare_initial_pair_connected(&bath, *mode)?;
    let decomp = diagonalize(&pair.post_quench)?;
    let obs = config.observables;
    let prop = decomp.propagator(&psi)?;
    let prop_p = decomp.propagator(&psi_p)?;

    let rows = times
        .par_iter()
        .map(|&t| {
            let rho = spin_rdm(&prop.at(t))?;
            let rho_p = spin_rdm(&prop_p.at(t))?;
            let d = trace_distance(&rho, &rho_p)?;
            let s = if obs.entropy {
                von_neumann_entropy(&rho)?
            } else {
                0.0
            };
            Ok((d, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let (d, s): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();

    let bath_corr = if obs.bath_correlation {
        let b = joining_operator(spec, &sym, Some(&coup), *mode)?;
        Some(bath_correlation(
            &decomp,
            &b,
            &psi,
            &times,
            obs.correlation_kind,
        )?)
    } else {
        None
    };
    Ok(QuenchResult {
        trace_distance: TimeSeries::new(times.clone(), d, "trace_distance")?,
        entropy: if obs.entropy {
            Some(TimeSeries::new(times, s, "vn_entropy")?)
        } else {
            None
        },
        bath_corr,
        seed: config.seed,
    })
}
