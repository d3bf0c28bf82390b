//! Dense statevector simulation over qubit (and qutrit) registers.
//!
//! Gates are applied in place over strided amplitude pairs; nothing in this
//! module materializes a full unitary.

mod circuit;
mod gate;
mod state;

pub use circuit::Circuit;
pub use gate::{apply_pauli_rotation, Gate};
pub use state::{trace_distance_states, StateVector};
