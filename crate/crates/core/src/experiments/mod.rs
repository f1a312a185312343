//! Paired quenches, realization ensembles, equilibration-time extraction
//! and scaling studies.

pub mod config;
pub mod ensemble;
pub mod quench;
pub mod scaling;
pub mod tg;

pub use config::{FillBasis, ModelConfig, ObservableSet, QuenchConfig, TgParams, TimeGrid};
pub use ensemble::{
    ensemble_from_seeds, ensemble_run, ensemble_seeds, nm_window_comparison, EnsembleResult,
    NmReport, NmWindow,
};
pub use quench::{run_connected_quench, run_quench, run_torus_quench, QuenchResult};
pub use scaling::{
    tg_scaling_experiment, HorizonRule, HorizonSpacing, ScalingParameter, ScalingResult, ScalingRow,
};
pub use tg::{extract_tg_peaks, extract_tg_threshold, reconstruction_peaks, TgEstimate};
