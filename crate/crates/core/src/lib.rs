//! Entanglement asymmetry of spin-chain eigenstates and U(1)-symmetric random states.

pub mod analytics;
pub mod eig;
pub mod ensemble;
pub mod entanglement;
pub mod error;
pub mod spins;

pub use error::{Error, Result};
