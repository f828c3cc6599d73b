//! Simulation and quantum-estimation toolkit for a qubit–cavity–mechanics
//! hybrid system.
//!
//! The system is a two-level atom coupled to a single cavity mode through a
//! Jaynes–Cummings interaction (strength `g1`) while the cavity drives a
//! mechanical oscillator through radiation pressure (strength `g2`). The crate
//! computes closed and open dynamics, quantum and classical Fisher information
//! for the global state and for each reduced subsystem, homodyne bounds on the
//! light field, and efficiency / optimal-subsystem maps.
//!
//! All frequencies and times are expressed in units of the mechanical
//! frequency (`omega_m = 1`). The tensor-product ordering is
//! qubit ⊗ cavity ⊗ mechanics and the qubit basis is `{|g⟩, |e⟩}` with
//! `σ_z|g⟩ = −|g⟩`.

extern crate blas_src;

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod hilbert;
pub mod homodyne;
pub mod model;
pub mod oracles;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Library version, echoed into run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
