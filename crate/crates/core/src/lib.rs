//! Entropy-stable, well-balanced nodal DG solver for the one-dimensional
//! shallow water moment equations.

pub mod dgsem;
pub mod diagnostics;
pub mod error;
pub mod fluxes;
pub mod model;
pub mod moment_basis;
pub mod runner;
pub mod scenarios;
pub mod time;

pub use error::{Error, Result};
