//! Integrable three-state Potts and Z(n) clock chains with toroidal boundary
//! conditions: vertex-model construction, commuting transfer matrices, exact
//! diagonalization and Bethe-ansatz solution of the spectra.

pub mod algebra;
pub mod bethe;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod rng;
pub mod spectra;
pub mod transfer;
pub mod weights;

pub use algebra::ComplexMatrix;
pub use error::{Error, Result};
