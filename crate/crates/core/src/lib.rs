//! Verification laboratory for SU(p,q) coherent states.

pub mod bases;
pub mod coherent;
pub mod combinatorics;
pub mod definetti;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod haar;
pub mod hyperbolic;
pub mod linalg;
pub mod phase_space;
pub mod quadrature;
pub mod scalar;
pub mod stream;

pub use error::{Error, Result};
