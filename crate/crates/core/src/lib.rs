//! Diagnosis of lithium-ion degradation modes from slow-discharge voltage data.
//!
//! A single-particle model simulates C/20 discharges; differential capacity
//! (dQ/dV) features of the measured curve decide which of loss of lithium
//! inventory (LLI) and loss of active material in either electrode (LAM_NE,
//! LAM_PE) are present, and a sequential grid search recovers the three model
//! parameters that carry them: `c_n0`, `eps_n` and `eps_p`.

pub mod constants;
pub mod dataio;
pub mod degradation;
pub mod diagnose;
mod error;
pub mod format;
pub mod ica;
pub mod model;

pub use error::{Error, Origin, Result};
