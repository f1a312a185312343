pub mod cli;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod spectra;

pub use error::{Error, Result};
