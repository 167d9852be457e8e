#![allow(dead_code)]

use lidiag_core::model::{Direction, Provenance, TraceSample, VoltageTrace};

/// Discharge trace from charge/voltage pairs at 1 A with 1 s sampling.
pub fn trace_from(q: &[f64], v: &[f64]) -> VoltageTrace {
    let samples = q
        .iter()
        .zip(v)
        .enumerate()
        .map(|(i, (&q, &v))| TraceSample {
            time: i as f64,
            current: 1.0,
            charge_throughput: q,
            voltage: v,
        })
        .collect();
    VoltageTrace::new(samples, Direction::Discharge, Provenance::Simulated).unwrap()
}

/// Trace sampled from `v(q)` on `n` uniform charge points over `[0, cap]`.
pub fn trace_of(n: usize, cap: f64, v: impl Fn(f64) -> f64) -> VoltageTrace {
    let q: Vec<f64> = (0..n).map(|i| cap * i as f64 / (n - 1) as f64).collect();
    let vs: Vec<f64> = q.iter().map(|&x| v(x)).collect();
    trace_from(&q, &vs)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub mod oracle;
