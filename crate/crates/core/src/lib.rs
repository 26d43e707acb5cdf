//! Numerical laboratory for anomalous energy dissipation of Navier–Stokes
//! flows with high-frequency initial data.
//!
//! Periodic pseudo-spectral fields, smooth cutoffs, the constructed data
//! family, Littlewood–Paley blocks and Besov norms, the heat comparison flow,
//! an integrating-factor Navier–Stokes solver and the experiment driver.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoffs;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod heat_flow;
pub mod initial_data;
pub mod littlewood_paley;
pub mod ns_solver;
pub mod quad;

pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentRecord, Verdicts};
pub use fourier::{Direction, Field, FieldData, Grid, Rank, Representation};
pub use heat_flow::{HeatSeries, SpectralMeasure};
pub use initial_data::{DataParams, InitialData};
pub use ns_solver::{SolverConfig, Trajectory};
