//! Diagonalization, exact propagation, dephasing, the many-body basis and
//! initial-state preparation.

pub mod fock;
pub mod initial;
pub mod spectral;
pub mod state;

pub use fock::{build_many_body_hamiltonian, dimension_cap, slater_amplitudes, FockBasis};
pub use initial::{
    prepare_initial_pair_2d, prepare_initial_pair_connected, spinor_pair, BathFilling,
};
pub use spectral::{
    dephase, dephased_components, diagonalize, evolve, evolve_many, evolve_orbitals, DephaseMode,
    ProjectedPropagator, SpectralDecomposition,
};
pub use state::{BasisTag, OrbitalEnsemble, PureState};
