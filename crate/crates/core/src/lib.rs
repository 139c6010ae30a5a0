//! Simulation of a translationally invariant quantum cellular automaton
//! driven by a fixed nearest-neighbour Hamiltonian.

pub mod assembler;
pub mod chain;
pub mod cjson;
pub mod error;
pub mod evolver;
pub mod hamiltonian;
pub mod linalg;
pub mod qma;
pub mod special;
pub mod transport;

pub use error::{Error, Result};
