//! Shared fixtures for the benchmarks.

use lidiag_core::dataio::reference::{reference_cell, ReferenceScenario};
use lidiag_core::model::{CellParameters, VoltageTrace};

/// Bundled BOL cell and the 100k-cycle synthetic trace.
pub fn fixture() -> (CellParameters, VoltageTrace) {
    (
        reference_cell().expect("bundled cell"),
        ReferenceScenario::Cycles100k
            .trace()
            .expect("bundled trace"),
    )
}
