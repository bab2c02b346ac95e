//! Reference computations for the crossdamp test suites.
//!
//! Nothing here calls into `crossdamp`. Each routine reaches its answer by a
//! different road than the library: numerical integration instead of closed
//! forms, Fock-space linear algebra instead of Gaussian formulas, extended
//! precision summation instead of transformed series.

pub mod finite_diff;
pub mod fock;
pub mod hypergeometric;
pub mod ode;

pub use num_complex::Complex64;
