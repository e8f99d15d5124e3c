//! Simulation of single-spin readout through a spin-polarized
//! single-electron turnstile coupled to a donor spin gate.
//!
//! Modules build on each other in order: [`spin_algebra`] (Pauli operators,
//! density matrices, unitary evolution), [`model`] (Hamiltonians and
//! tunneling rates), [`cycle`] (one measurement cycle and the instrument it
//! induces on the gate), [`experiment`] (shot statistics, currents,
//! calibration, sweeps) and [`tomography`] (linear reconstruction of the gate
//! state). [`cli`] wires them to a configuration-driven command line.
//!
//! Units: ħ = 1, energies and couplings in rad/s, times in seconds.

pub mod cli;
pub mod cycle;
pub mod error;
pub mod experiment;
pub mod model;
pub mod spin_algebra;
pub mod tomography;

pub use error::{Error, Result};
