//! Redescending and monotone M-estimates of location, their exact
//! finite-sample breakdown points, the M-estimate / kernel-mode duality, and
//! principal-component constructions built on robust scales.
//!
//! Modules, bottom up:
//! - [`rho`]: ρ/ψ/κ families (Welsch, Epanechnikov, Huber).
//! - [`location`]: fixed-scale and MAD-scaled location estimates.
//! - [`breakdown`]: ε* from the minimum objective, and contamination stress.
//! - [`kde`]: kernel density estimates and their modes.
//! - [`pca`]: Jacobi eigendecomposition, eigenvalue replacement, direction metric.
//! - [`data`], [`fig1`], [`report`]: generation, CSV input, JSON/CSV output.

pub mod breakdown;
pub mod data;
pub mod error;
pub mod fig1;
pub mod kde;
pub mod location;
pub mod pca;
pub mod report;
pub mod rho;
pub mod search;

pub use error::{Error, Result};
pub use location::{LocationFit, Sample, ScaleMode};
pub use pca::{Direction, ExtendedDirection, MultiSample};
pub use rho::RhoFamily;
pub use search::SolverConfig;
