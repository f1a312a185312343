//! Measured quantities: reduced density matrices, trace distance, entropy,
//! the non-Markovianity measure, bath correlations and dephased long-time
//! estimates.

pub mod dynamics;
pub mod measures;
pub mod rdm;
pub mod series;

pub use dynamics::{
    angle_scan, bath_correlation, dephased_occupancy, long_time_mean_estimate,
    long_time_mean_estimate_orbitals, CorrelationKind,
};
pub use measures::{trace_distance, von_neumann_entropy};
pub use rdm::{
    combine_rdm, occupancy_rdm, orbital_occupancy_rdm, spin_rdm, OccupancyCoherence, RdmLabel,
    ReducedDensityMatrix,
};
pub use series::{nm_measure, TimeSeries};
