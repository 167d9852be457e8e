use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Charge,
    Discharge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Simulated,
    Measured,
}

/// One row of a voltage trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    /// s
    pub time: f64,
    /// A, discharge positive.
    pub current: f64,
    /// Ah moved since the start of the step, always non-negative.
    pub charge_throughput: f64,
    /// V
    pub voltage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoltageTrace {
    pub samples: Vec<TraceSample>,
    pub direction: Direction,
    pub provenance: Provenance,
}

impl VoltageTrace {
    pub fn new(
        samples: Vec<TraceSample>,
        direction: Direction,
        provenance: Provenance,
    ) -> Result<Self> {
        let trace = Self {
            samples,
            direction,
            provenance,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::Data("trace has no samples".into()));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if ![s.time, s.current, s.charge_throughput, s.voltage]
                .iter()
                .all(|v| v.is_finite())
            {
                return Err(Error::Data(format!("sample {i} has a non-finite value")));
            }
            if s.charge_throughput < 0.0 {
                return Err(Error::Data(format!(
                    "sample {i} has negative charge throughput"
                )));
            }
        }
        if let Some(i) = self.samples.windows(2).position(|w| w[1].time <= w[0].time) {
            return Err(Error::Data(format!(
                "time not strictly increasing at sample {}",
                i + 1
            )));
        }
        self.check_charge_monotone()
    }

    fn check_charge_monotone(&self) -> Result<()> {
        match self
            .samples
            .windows(2)
            .position(|w| w[1].charge_throughput < w[0].charge_throughput)
        {
            Some(i) => Err(Error::Data(format!(
                "charge throughput decreases at sample {}",
                i + 1
            ))),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Final charge throughput, Ah.
    pub fn capacity(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.charge_throughput)
    }

    pub fn voltages(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.voltage)
    }

    pub fn charges(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.charge_throughput)
    }
}

/// Linear interpolation of `ys` at `x` over non-decreasing `xs`, exact at nodes.
pub fn interp_monotone(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let hi = xs.partition_point(|&v| v < x);
    if xs[hi] == x {
        return ys[hi];
    }
    let lo = hi - 1;
    let span = xs[hi] - xs[lo];
    if span == 0.0 {
        return ys[lo];
    }
    let w = (x - xs[lo]) / span;
    ys[lo] + w * (ys[hi] - ys[lo])
}

/// Resamples a trace onto `n_points` samples evenly spaced in charge throughput.
///
/// The first and last samples are carried over unchanged; time, current and
/// voltage are linearly interpolated in between.
pub fn resample_trace(trace: &VoltageTrace, n_points: usize) -> Result<VoltageTrace> {
    if n_points < 2 {
        return Err(Error::Domain(format!(
            "n_points must be >= 2, got {n_points}"
        )));
    }
    if trace.is_empty() {
        return Err(Error::Data("cannot resample an empty trace".into()));
    }
    trace.check_charge_monotone()?;
    let first = trace.samples[0];
    let last = trace.samples[trace.len() - 1];
    let span = last.charge_throughput - first.charge_throughput;
    if span <= 0.0 {
        return Err(Error::Data(
            "trace carries no charge; cannot resample".into(),
        ));
    }

    let q: Vec<f64> = trace.charges().collect();
    let t: Vec<f64> = trace.samples.iter().map(|s| s.time).collect();
    let i: Vec<f64> = trace.samples.iter().map(|s| s.current).collect();
    let v: Vec<f64> = trace.voltages().collect();

    let denom = (n_points - 1) as f64;
    let mut samples = Vec::with_capacity(n_points);
    samples.push(first);
    for k in 1..n_points - 1 {
        let qk = first.charge_throughput + span * (k as f64 / denom);
        samples.push(TraceSample {
            time: interp_monotone(&q, &t, qk),
            current: interp_monotone(&q, &i, qk),
            charge_throughput: qk,
            voltage: interp_monotone(&q, &v, qk),
        });
    }
    samples.push(last);
    // Interpolated times inherit strict monotonicity from the source except
    // across zero-charge segments; such traces are rejected here.
    VoltageTrace::new(samples, trace.direction, trace.provenance)
}
