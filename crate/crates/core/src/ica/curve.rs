use serde::{Deserialize, Serialize};

use super::smoothing::{SmoothingConfig, SmoothingMethod};
use crate::error::{Error, Result};
use crate::model::{resample_trace, Direction, Provenance, VoltageTrace};

/// Voltage steps below this are merged rather than differenced, V.
pub const MIN_VOLTAGE_STEP: f64 = 1e-6;

/// Uniform-charge resolution the diagnosis pipeline differentiates on.
pub const DEFAULT_RESAMPLE_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcaSample {
    /// V
    pub voltage: f64,
    /// Ah/V, reported as a magnitude.
    pub dq_dv: f64,
}

/// Differential capacity curve in the sample order of its source trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcaCurve {
    pub samples: Vec<DcaSample>,
    pub source: Provenance,
    pub smoothing_applied: SmoothingConfig,
}

impl DcaCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn voltages(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.voltage).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.dq_dv).collect()
    }

    /// `(min, max)` voltage covered by the curve.
    pub fn voltage_span(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.voltage), hi.max(s.voltage))
            })
    }

    /// Trapezoidal integral of dQ/dV over voltage, Ah.
    pub fn integral(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[0].dq_dv + w[1].dq_dv) * (w[1].voltage - w[0].voltage).abs())
            .sum()
    }

    /// Divides every value by `capacity`, giving 1/V.
    pub fn normalized(&self, capacity: f64) -> DcaCurve {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.dq_dv /= capacity;
        }
        out
    }
}

/// Pool-adjacent-violators fit of a non-decreasing sequence. Returns blocks as
/// `(start, end_exclusive, level)`.
fn isotonic_blocks(y: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut blocks: Vec<(usize, usize, f64)> = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        blocks.push((i, i + 1, v));
        while blocks.len() > 1 {
            let (s1, e1, l1) = blocks[blocks.len() - 1];
            let (s0, e0, l0) = blocks[blocks.len() - 2];
            if l0 < l1 {
                break;
            }
            let w0 = (e0 - s0) as f64;
            let w1 = (e1 - s1) as f64;
            blocks.pop();
            *blocks.last_mut().expect("two blocks present") =
                (s0, e1, (w0 * l0 + w1 * l1) / (w0 + w1));
        }
    }
    blocks
}

/// Collapses `(q, v)` into points whose voltage moves strictly in the
/// direction implied by `falling`, with steps of at least `MIN_VOLTAGE_STEP`.
/// Runs that reverse direction are pooled, flat runs are merged; each merged
/// group becomes one point at its mean charge and voltage.
fn monotone_points(q: &[f64], v: &[f64], falling: bool) -> Vec<(f64, f64)> {
    let sign = if falling { -1.0 } else { 1.0 };
    let oriented: Vec<f64> = v.iter().map(|x| sign * x).collect();
    // (charge sum, level, weight); merging only raises a group's level, so a
    // single pass leaves every step at least MIN_VOLTAGE_STEP.
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for (s, e, level) in isotonic_blocks(&oriented) {
        let w = (e - s) as f64;
        let q_sum: f64 = q[s..e].iter().sum();
        match groups.last_mut() {
            Some(g) if level - g.1 < MIN_VOLTAGE_STEP => {
                g.1 = (g.1 * g.2 + level * w) / (g.2 + w);
                g.0 += q_sum;
                g.2 += w;
            }
            _ => groups.push((q_sum, level, w)),
        }
    }
    groups
        .into_iter()
        .map(|(qs, l, w)| (qs / w, sign * l))
        .collect()
}

/// Differential capacity of a trace.
///
/// With smoothing enabled the voltage is filtered along the sample index
/// before differencing, and the derivative is filtered again afterwards;
/// measurement noise otherwise dominates the small voltage steps of a slow
/// discharge. The result spans the interior of the cleaned voltage grid.
pub fn compute_dca(trace: &VoltageTrace, cfg: &SmoothingConfig) -> Result<DcaCurve> {
    cfg.validate()?;
    if trace.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 samples for dQ/dV, got {}",
            trace.len()
        )));
    }
    let q: Vec<f64> = trace.charges().collect();
    let raw_v: Vec<f64> = trace.voltages().collect();
    let v = if cfg.method == SmoothingMethod::None {
        raw_v
    } else {
        cfg.apply(&raw_v)?
    };
    let falling = trace.direction == Direction::Discharge;
    let pts = monotone_points(&q, &v, falling);
    if pts.len() < 3 {
        return Err(Error::Data(format!(
            "only {} points with distinct voltage remain; need at least 3",
            pts.len()
        )));
    }

    let mut voltage = Vec::with_capacity(pts.len() - 2);
    let mut dq_dv = Vec::with_capacity(pts.len() - 2);
    for w in pts.windows(3) {
        let (q0, v0) = w[0];
        let (q2, v2) = w[2];
        voltage.push(w[1].1);
        dq_dv.push(((q2 - q0) / (v2 - v0)).abs());
    }
    let dq_dv = cfg.apply(&dq_dv)?;
    if let Some(i) = dq_dv.iter().position(|x| !x.is_finite()) {
        return Err(Error::Data(format!("non-finite dQ/dV at point {i}")));
    }
    Ok(DcaCurve {
        samples: voltage
            .into_iter()
            .zip(dq_dv)
            .map(|(voltage, dq_dv)| DcaSample { voltage, dq_dv })
            .collect(),
        source: trace.provenance,
        smoothing_applied: *cfg,
    })
}

/// Resamples onto `DEFAULT_RESAMPLE_POINTS` uniform-charge points, then
/// differentiates. This is the curve every diagnosis decision is made on.
pub fn diagnostic_dca(trace: &VoltageTrace, cfg: &SmoothingConfig) -> Result<DcaCurve> {
    compute_dca(&resample_trace(trace, DEFAULT_RESAMPLE_POINTS)?, cfg)
}
