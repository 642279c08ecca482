//! Planning and analytic simulation of quantum phase estimation (QPE) for
//! Hamiltonians written as sums of Pauli strings.

pub mod error;
pub mod export;
pub mod lcu;
pub mod linalg;
pub mod oracle;
pub mod pauli;
pub mod planner;
pub mod shots;
pub mod spectral;
pub mod state;
pub mod sweep;
pub mod trotter;

pub use error::{QpeError, Result};
pub use lcu::{LcuHamiltonian, LcuTerm};
pub use pauli::{PauliOp, PauliString, C64};
