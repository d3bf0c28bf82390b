//! Variational Hamiltonian and state learning from observable time series.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the common `f64` instantiation.

extern crate self as hamlearn_core;

pub mod dataset;
pub mod error;
pub mod hamiltonian;
pub mod hamlearn;
pub mod linalg;
pub mod optim;
pub mod pauli;
pub mod scalar;
pub mod sim;
pub mod statelearn;
pub mod su3;
pub mod trotter;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;

pub use error::{Error, Result};
pub use hamiltonian::{Coefficients, Family, ParamHamiltonian};
pub use pauli::{Pauli, PauliString};
pub use scalar::{Real, C};

pub type StateVector64 = sim::StateVector<f64>;
pub type StateVector32 = sim::StateVector<f32>;
pub type Circuit64 = sim::Circuit<f64>;
pub type Gate64 = sim::Gate<f64>;
pub type PauliObservable64 = pauli::PauliObservable<f64>;
pub type ParamHamiltonian64 = hamiltonian::ParamHamiltonian<f64>;
pub type ParamHamiltonian32 = hamiltonian::ParamHamiltonian<f32>;
