//! Pulse synthesis for stimulated Raman user-defined passages (STIRUP) on a
//! weakly anharmonic transmon, with the STIRAP, resonant-Rabi, counterdiabatic
//! and DRAG baselines, open-system simulation, derivative-free pulse
//! optimization, and robustness sweeps.
//!
//! Units: ħ = 1, times in ns, angular frequencies in rad/ns.

pub mod bench;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod optimize;
pub mod passage;
pub mod qstate;

pub use error::{Error, Result};
