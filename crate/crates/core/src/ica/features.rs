use serde::{Deserialize, Serialize};

use super::curve::DcaCurve;
use crate::error::{Error, Result};

/// Voltage interval `[lo, hi]`, V.
pub type VoltageWindow = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindows {
    pub peak_window: VoltageWindow,
    pub valley_window: VoltageWindow,
}

impl Default for FeatureWindows {
    fn default() -> Self {
        Self {
            peak_window: [3.35, 3.55],
            valley_window: [3.70, 3.95],
        }
    }
}

impl FeatureWindows {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [
            ("peak_window", self.peak_window),
            ("valley_window", self.valley_window),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Window(format!(
                    "{name} [{lo}, {hi}] is not an increasing interval"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    /// V
    pub position: f64,
    /// Ah/V
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcaFeatureSet {
    pub low_voltage_peak: Option<Feature>,
    pub high_voltage_valley: Option<Feature>,
    pub search_windows: FeatureWindows,
}

impl DcaFeatureSet {
    pub fn peak(&self) -> Result<Feature> {
        self.low_voltage_peak
            .ok_or(Error::MissingFeature("low_voltage_peak"))
    }

    pub fn valley(&self) -> Result<Feature> {
        self.high_voltage_valley
            .ok_or(Error::MissingFeature("high_voltage_valley"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureChange {
    /// Degraded minus reference position, V.
    pub shift: f64,
    /// Degraded over reference magnitude.
    pub ratio: f64,
}

impl FeatureChange {
    pub fn between(reference: Feature, degraded: Feature) -> Self {
        Self {
            shift: degraded.position - reference.position,
            ratio: degraded.magnitude / reference.magnitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureDelta {
    pub low_voltage_peak: FeatureChange,
    pub high_voltage_valley: FeatureChange,
}

/// Vertex of the parabola through three points, clamped to their span.
fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a == 0.0 || !a.is_finite() {
        return (x[1], y[1]);
    }
    // y = y1 + b (t - x1) + a (t - x1)^2 with b the slope at x1
    let b = d1 + a * (x[1] - x[0]);
    let lo = x[0].min(x[2]);
    let hi = x[0].max(x[2]);
    let t = (x[1] - b / (2.0 * a)).clamp(lo, hi);
    let dt = t - x[1];
    (t, y[1] + b * dt + a * dt * dt)
}

fn extremum(curve: &DcaCurve, [lo, hi]: VoltageWindow, maximum: bool) -> Option<Feature> {
    let idx: Vec<usize> = (0..curve.len())
        .filter(|&i| (lo..=hi).contains(&curve.samples[i].voltage))
        .collect();
    if idx.len() < 3 {
        return None;
    }
    let better = |a: f64, b: f64| if maximum { a > b } else { a < b };
    let mut best = 0;
    for k in 1..idx.len() {
        if better(curve.samples[idx[k]].dq_dv, curve.samples[idx[best]].dq_dv) {
            best = k;
        }
    }
    if best == 0 || best == idx.len() - 1 {
        return None;
    }
    let i = idx[best];
    let s = &curve.samples;
    let (position, magnitude) = parabolic_vertex(
        [s[i - 1].voltage, s[i].voltage, s[i + 1].voltage],
        [s[i - 1].dq_dv, s[i].dq_dv, s[i + 1].dq_dv],
    );
    Some(Feature {
        position,
        magnitude,
    })
}

/// Global maximum in the peak window and global minimum in the valley window.
/// A feature whose extremum sits on a window edge is reported absent.
pub fn find_features(curve: &DcaCurve, windows: &FeatureWindows) -> Result<DcaFeatureSet> {
    windows.validate()?;
    if curve.is_empty() {
        return Err(Error::Window("curve has no samples".into()));
    }
    let (vmin, vmax) = curve.voltage_span();
    for (name, [lo, hi]) in [
        ("peak_window", windows.peak_window),
        ("valley_window", windows.valley_window),
    ] {
        if hi < vmin || lo > vmax {
            return Err(Error::Window(format!(
                "{name} [{lo}, {hi}] V does not intersect the curve span [{vmin:.4}, {vmax:.4}] V"
            )));
        }
    }
    Ok(DcaFeatureSet {
        low_voltage_peak: extremum(curve, windows.peak_window, true),
        high_voltage_valley: extremum(curve, windows.valley_window, false),
        search_windows: *windows,
    })
}

pub fn feature_shift(reference: &DcaFeatureSet, degraded: &DcaFeatureSet) -> Result<FeatureDelta> {
    Ok(FeatureDelta {
        low_voltage_peak: FeatureChange::between(reference.peak()?, degraded.peak()?),
        high_voltage_valley: FeatureChange::between(reference.valley()?, degraded.valley()?),
    })
}
