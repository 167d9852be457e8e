//! Cell model: OCP tables, parameter sets, voltage traces and the
//! single-particle simulator.

mod ocp;
mod params;
mod spm;
mod trace;

pub use ocp::{ocp_eval, Electrode, OcpTable, OcpValue};
pub use params::{CellParameters, ElectrodeParameters};
pub use spm::{
    discharged_state, half_cell_capacity, simulate, simulate_constant_current, LithiumBalance,
    SimulationOptions, SimulationOutcome, DEFAULT_DT, DEFAULT_SHELLS, DIAGNOSTIC_C_RATE,
};
pub use trace::{resample_trace, Direction, Provenance, TraceSample, VoltageTrace};

pub use trace::interp_monotone;
