//! Minimal statevector simulator.
//!
//! Basis-state indices put qubit 0 in the most significant bit. All gates are
//! checked for unitarity when built from raw entries.

mod gate;
mod qft;
mod state;

pub use gate::{GateMatrix, UNITARY_TOL};
pub use state::{Outcome, StateVector, DEFAULT_QUBIT_CAP, NORM_TOL, PROBABILITY_TOL};
