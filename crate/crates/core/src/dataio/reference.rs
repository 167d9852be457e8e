//! The bundled reference chemistry: a fresh-cell config with its two OCP
//! tables, plus synthetic C/20 discharges of the fresh cell and of the cell
//! aged to 100k and 250k cycle-equivalents.
//!
//! The files live under `data/reference` and are also compiled into the
//! library, so the reference set is available without the source tree.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::parse_cell_config;
use super::measurement::parse_voltage_csv;
use super::MeasurementFileSpec;
use crate::error::Result;
use crate::model::{CellParameters, VoltageTrace};

pub const CONFIG_FILE: &str = "cell_bol.json";

const CONFIG_JSON: &str = include_str!("../../data/reference/cell_bol.json");
const OCP_NEGATIVE_CSV: &str = include_str!("../../data/reference/cell_bol_ocp_negative.csv");
const OCP_POSITIVE_CSV: &str = include_str!("../../data/reference/cell_bol_ocp_positive.csv");
const TRACE_FRESH_CSV: &str = include_str!("../../data/reference/trace_fresh.csv");
const TRACE_100K_CSV: &str = include_str!("../../data/reference/trace_100k.csv");
const TRACE_250K_CSV: &str = include_str!("../../data/reference/trace_250k.csv");

/// Directory holding the reference files in the source tree.
pub fn reference_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join("reference")
}

/// The fresh reference cell.
pub fn reference_cell() -> Result<CellParameters> {
    parse_cell_config(
        CONFIG_JSON,
        OCP_NEGATIVE_CSV,
        OCP_POSITIVE_CSV,
        &reference_dir().join(CONFIG_FILE),
    )
}

/// Aging parameters of a reference scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingState {
    /// mol/m^3
    pub c_n0: f64,
    pub eps_n: f64,
    pub eps_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceScenario {
    Fresh,
    #[serde(rename = "100k")]
    Cycles100k,
    #[serde(rename = "250k")]
    Cycles250k,
}

impl ReferenceScenario {
    pub const ALL: [ReferenceScenario; 3] = [Self::Fresh, Self::Cycles100k, Self::Cycles250k];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fresh => "fresh",
            Self::Cycles100k => "100k",
            Self::Cycles250k => "250k",
        }
    }

    pub fn trace_file(self) -> &'static str {
        match self {
            Self::Fresh => "trace_fresh.csv",
            Self::Cycles100k => "trace_100k.csv",
            Self::Cycles250k => "trace_250k.csv",
        }
    }

    /// Parameters the scenario's synthetic trace was simulated with.
    pub fn aging_state(self) -> AgingState {
        match self {
            Self::Fresh => AgingState {
                c_n0: 2.75e4,
                eps_n: 0.582,
                eps_p: 0.540,
            },
            Self::Cycles100k => AgingState {
                c_n0: 2.65e4,
                eps_n: 0.561,
                eps_p: 0.520,
            },
            Self::Cycles250k => AgingState {
                c_n0: 2.515e4,
                eps_n: 0.557,
                eps_p: 0.515,
            },
        }
    }

    /// Measured C/20 capacity fade reported for the aged cells, fraction of BOL.
    pub fn reported_capacity_fade(self) -> f64 {
        match self {
            Self::Fresh => 0.0,
            Self::Cycles100k => 0.078,
            Self::Cycles250k => 0.1296,
        }
    }

    /// The bundled synthetic C/20 discharge for this scenario.
    pub fn trace(self) -> Result<VoltageTrace> {
        let text = match self {
            Self::Fresh => TRACE_FRESH_CSV,
            Self::Cycles100k => TRACE_100K_CSV,
            Self::Cycles250k => TRACE_250K_CSV,
        };
        parse_voltage_csv(
            text,
            &reference_dir().join(self.trace_file()),
            &MeasurementFileSpec::trace_file(),
        )
    }

    pub fn trace_path(self) -> PathBuf {
        reference_dir().join(self.trace_file())
    }
}

impl std::str::FromStr for ReferenceScenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`; expected fresh, 100k or 250k"))
    }
}
