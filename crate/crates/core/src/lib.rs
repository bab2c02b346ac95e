//! Cross-damped two-ion motional dynamics in a common thermal reservoir.
//!
//! * [`model`]: trap geometry, effective coupling and reservoir occupation.
//! * [`dynamics`]: exact Gaussian second-moment evolution and closed forms.
//! * [`phonon_stats`]: single-ion phonon-number distributions and sampling.
//! * [`inference`]: Fisher information, Cramer-Rao bounds and an MLE harness.
//! * [`entanglement`]: real covariance matrices and the PPT invariant `Y`.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod inference;
pub mod model;
pub mod phonon_stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
