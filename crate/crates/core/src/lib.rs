//! Simulation of resonant laser excitation of single J aggregates: chains
//! and rings of three-level molecules coupled by delayed dipole–dipole
//! interaction, with exciton–exciton annihilation and static disorder.

pub mod analysis;
pub mod coupling;
pub mod disorder;
pub mod dynamics;
pub mod spectra;
mod error;

pub use error::{Error, Result};
