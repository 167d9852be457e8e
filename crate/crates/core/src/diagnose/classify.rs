use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ica::FeatureDelta;

/// Decision thresholds. Shifts are in volts, ratio significances are
/// fractions (0.02 means a 2% change).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisThresholds {
    pub valley_shift_significant: f64,
    pub peak_ratio_significant: f64,
    pub valley_ratio_significant: f64,
    pub residual_valley_shift: f64,
}

impl Default for DiagnosisThresholds {
    fn default() -> Self {
        Self {
            valley_shift_significant: 0.005,
            peak_ratio_significant: 0.02,
            valley_ratio_significant: 0.02,
            residual_valley_shift: 0.005,
        }
    }
}

impl DiagnosisThresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("valley_shift_significant", self.valley_shift_significant),
            ("peak_ratio_significant", self.peak_ratio_significant),
            ("valley_ratio_significant", self.valley_ratio_significant),
            ("residual_valley_shift", self.residual_valley_shift),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    name,
                    format!("threshold must be > 0, got {v}"),
                ));
            }
        }
        if self.valley_ratio_significant >= 1.0 {
            return Err(Error::param("valley_ratio_significant", "must be below 1"));
        }
        Ok(())
    }
}

/// Human-readable reasons, one per raised flag.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lli: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lam_ne: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lam_pe: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MechanismFlags {
    pub lli: bool,
    pub lam_ne: bool,
    pub lam_pe: bool,
    pub evidence: Evidence,
}

impl MechanismFlags {
    /// True when every raised flag carries evidence.
    pub fn is_justified(&self) -> bool {
        (!self.lli || self.evidence.lli.is_some())
            && (!self.lam_ne || self.evidence.lam_ne.is_some())
            && (!self.lam_pe || self.evidence.lam_pe.is_some())
    }
}

/// LLI needs both a valley moving up and a stronger low-voltage peak; LAM_NE
/// shows as a weaker valley. LAM_PE is left for the post-fit residual check.
pub fn classify_mechanisms(
    delta: &FeatureDelta,
    thresholds: &DiagnosisThresholds,
) -> MechanismFlags {
    let valley = delta.high_voltage_valley;
    let peak = delta.low_voltage_peak;
    let mut flags = MechanismFlags::default();

    if valley.shift > thresholds.valley_shift_significant
        && peak.ratio > 1.0 + thresholds.peak_ratio_significant
    {
        flags.lli = true;
        flags.evidence.lli = Some(format!(
            "high-voltage valley moved {:+.2} mV (> {:.2} mV) and the low-voltage peak grew by a factor {:.4} (> {:.4})",
            valley.shift * 1e3,
            thresholds.valley_shift_significant * 1e3,
            peak.ratio,
            1.0 + thresholds.peak_ratio_significant
        ));
    }
    if valley.ratio < 1.0 - thresholds.valley_ratio_significant {
        flags.lam_ne = true;
        flags.evidence.lam_ne = Some(format!(
            "high-voltage valley magnitude fell by a factor {:.4} (< {:.4})",
            valley.ratio,
            1.0 - thresholds.valley_ratio_significant
        ));
    }
    flags
}
