//! Statevector laboratory for variational and randomized-measurement
//! imaginary-time evolution: exact quantum Fisher information, two randomized
//! estimators built from measurement-probability derivatives, evolution
//! loops with state-preparation accounting, and verification oracles.

pub mod ansatz;
pub mod ensembles;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod fisher;
pub mod hamiltonian;
pub mod ite;
pub mod state;

pub use error::{Error, Result};
