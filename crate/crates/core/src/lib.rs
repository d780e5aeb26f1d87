//! Majorize-minimize iteration with a shared driver and a set of MM solvers:
//! multivariate t estimation, grouped exponential data, power series
//! families, random graphs with prescribed degrees, hinge-loss and
//! multicategory discriminant analysis, and total-variation image
//! restoration.

pub mod cli;
pub mod discriminant;
pub mod driver;
pub mod error;
pub mod format;
pub mod grouped_exp;
pub mod imaging;
pub mod io;
pub mod mvt;
pub mod power_series;
pub mod random_graph;
pub mod tables;

pub use driver::{
    estimate_rate, run_mm, spectral_radius_numeric, ConvergenceReport, Driver, IterationTrace,
    MmProblem, MmRun, Sense, StoppingRule, Termination,
};
pub use error::{MmError, Result};
