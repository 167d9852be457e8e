use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::format::{fmt_sig, round_sig};
use crate::ica::{DcaCurve, DcaFeatureSet, Feature};

pub const DCA_HEADER: [&str; 2] = ["voltage_v", "dq_dv_ah_per_v"];

pub fn export_dca(curve: &DcaCurve, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("{}\n", DCA_HEADER.join(","));
    for s in &curve.samples {
        out.push_str(&format!("{},{}\n", fmt_sig(s.voltage), fmt_sig(s.dq_dv)));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

/// Writes the feature set as pretty JSON.
pub fn export_features(features: &DcaFeatureSet, path: impl AsRef<Path>) -> Result<()> {
    let q = |f: Option<Feature>| {
        f.map(|f| Feature {
            position: round_sig(f.position),
            magnitude: round_sig(f.magnitude),
        })
    };
    let rounded = DcaFeatureSet {
        low_voltage_peak: q(features.low_voltage_peak),
        high_voltage_valley: q(features.high_voltage_valley),
        search_windows: features.search_windows,
    };
    let mut json =
        serde_json::to_string_pretty(&rounded).map_err(|e| Error::Data(e.to_string()))?;
    json.push('\n');
    write_atomic(path.as_ref(), json.as_bytes())
}
