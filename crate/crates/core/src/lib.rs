//! Adiabatic theorems for rotated Hamiltonian families, with and without a
//! spectral gap.

pub mod dicke;
pub mod error;
pub mod friedrichs;
pub mod grid;
pub mod linalg;
pub mod propagation;
pub mod quadrature;
pub mod resonance;
pub mod scaling;

pub use error::{Error, Result};
