//! Brute-force re-implementation of the three grid searches, written against
//! the documented selection rules only: every candidate is simulated in turn,
//! losses are computed here, and the argmin is taken with ties going to the
//! candidate nearest the BOL value.

use lidiag_core::degradation::with_aging_parameters;
use lidiag_core::ica::{diagnostic_dca, find_features, FeatureWindows, SmoothingConfig};
use lidiag_core::model::{simulate_constant_current, CellParameters, VoltageTrace};

pub struct Evaluated {
    pub trace: VoltageTrace,
    pub valley: Option<f64>,
}

pub fn evaluate(cell: &CellParameters) -> Option<Evaluated> {
    let trace = simulate_constant_current(cell, 0.05, 10.0).ok()?;
    let dca = diagnostic_dca(&trace, &SmoothingConfig::default()).ok()?;
    let valley = find_features(&dca, &FeatureWindows::default())
        .ok()?
        .high_voltage_valley
        .map(|f| f.position);
    Some(Evaluated { trace, valley })
}

fn lerp(q: &[f64], v: &[f64], x: f64) -> f64 {
    if x <= q[0] {
        return v[0];
    }
    if x >= q[q.len() - 1] {
        return v[v.len() - 1];
    }
    let mut hi = 1;
    while q[hi] < x {
        hi += 1;
    }
    let lo = hi - 1;
    if q[hi] == q[lo] {
        return v[lo];
    }
    v[lo] + (x - q[lo]) / (q[hi] - q[lo]) * (v[hi] - v[lo])
}

/// RMS voltage difference at 1000 equally spaced fractions of each trace's own capacity.
pub fn rms(sim: &VoltageTrace, meas: &VoltageTrace) -> f64 {
    let (qs, vs): (Vec<f64>, Vec<f64>) = sim
        .samples
        .iter()
        .map(|s| (s.charge_throughput, s.voltage))
        .unzip();
    let (qm, vm): (Vec<f64>, Vec<f64>) = meas
        .samples
        .iter()
        .map(|s| (s.charge_throughput, s.voltage))
        .unzip();
    let (cs, cm) = (sim.capacity(), meas.capacity());
    let n = 1000;
    let mut sum = 0.0;
    for k in 0..n {
        let u = k as f64 / (n - 1) as f64;
        let d = lerp(&qs, &vs, u * cs) - lerp(&qm, &vm, u * cm);
        sum += d * d;
    }
    (sum / n as f64).sqrt()
}

fn argmin(values: &[f64], losses: &[Option<f64>], bol: f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (&v, l) in values.iter().zip(losses) {
        let Some(l) = *l else { continue };
        best = match best {
            Some((bv, bl)) if bl < l || (bl == l && (bv - bol).abs() <= (v - bol).abs()) => {
                Some((bv, bl))
            }
            _ => Some((v, l)),
        };
    }
    best.map(|(v, _)| v)
}

pub struct State {
    pub c_n0: f64,
    pub eps_n: f64,
    pub eps_p: f64,
}

/// Stage 1: closest simulated valley to the measured one.
pub fn stage_cn0(
    bol: &CellParameters,
    s: &State,
    grid: &[f64],
    measured_valley: f64,
) -> Option<f64> {
    let losses: Vec<Option<f64>> = grid
        .iter()
        .map(|&c| {
            let cell = with_aging_parameters(bol, c, s.eps_n, s.eps_p).ok()?;
            Some((evaluate(&cell)?.valley? - measured_valley).abs())
        })
        .collect();
    argmin(grid, &losses, bol.negative.c_0)
}

/// Stage 2: smallest RMS among capacity-matched candidates; if none
/// matches, smallest RMS plus a dominant capacity penalty.
pub fn stage_eps_n(
    bol: &CellParameters,
    s: &State,
    grid: &[f64],
    meas: &VoltageTrace,
    tol: f64,
) -> Option<f64> {
    let evals: Vec<Option<(f64, f64)>> = grid
        .iter()
        .map(|&e| {
            let cell = with_aging_parameters(bol, s.c_n0, e, s.eps_p).ok()?;
            let ev = evaluate(&cell)?;
            let err = (ev.trace.capacity() - meas.capacity()).abs() / meas.capacity();
            Some((rms(&ev.trace, meas), err))
        })
        .collect();
    let any_matched = evals.iter().flatten().any(|&(_, err)| err <= tol);
    let losses: Vec<Option<f64>> = evals
        .iter()
        .map(|e| {
            e.and_then(|(r, err)| match (any_matched, err <= tol) {
                (true, true) => Some(r),
                (true, false) => None,
                (false, _) => Some(r + 1e3 * err),
            })
        })
        .collect();
    argmin(grid, &losses, bol.negative.epsilon)
}

/// Stage 3: smallest RMS.
pub fn stage_eps_p(
    bol: &CellParameters,
    s: &State,
    grid: &[f64],
    meas: &VoltageTrace,
) -> Option<f64> {
    let losses: Vec<Option<f64>> = grid
        .iter()
        .map(|&e| {
            let cell = with_aging_parameters(bol, s.c_n0, s.eps_n, e).ok()?;
            let ev = evaluate(&cell)?;
            Some(rms(&ev.trace, meas))
        })
        .collect();
    argmin(grid, &losses, bol.positive.epsilon)
}
