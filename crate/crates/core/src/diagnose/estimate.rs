//! Grid searches for the three aging parameters.
//!
//! Every candidate is simulated independently (in parallel when a rayon pool
//! is available) and the losses are reduced in grid order, so the selected
//! candidate never depends on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degradation::{apply_cn0, apply_epsilon, AgingParameter};
use crate::error::{Error, Result};
use crate::ica::{diagnostic_dca, find_features, DcaFeatureSet, FeatureWindows, SmoothingConfig};
use crate::model::{
    interp_monotone, simulate, CellParameters, Electrode, SimulationOptions, VoltageTrace,
    DEFAULT_DT, DEFAULT_SHELLS, DIAGNOSTIC_C_RATE,
};

/// Loss added per unit of relative capacity mismatch beyond the tolerance, V.
/// Large enough that any capacity-matched candidate beats any unmatched one.
pub const CAPACITY_PENALTY: f64 = 1.0e3;

/// Settings shared by every stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub c_rate: f64,
    /// Output step of candidate simulations, s.
    pub dt: f64,
    pub shells: usize,
    pub smoothing: SmoothingConfig,
    pub windows: FeatureWindows,
    /// Relative capacity mismatch accepted as a match in the `eps_n` stage.
    pub capacity_tolerance: f64,
    /// Points of the common capacity grid the RMS voltage error is taken on.
    pub rms_points: usize,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            c_rate: DIAGNOSTIC_C_RATE,
            dt: DEFAULT_DT,
            shells: DEFAULT_SHELLS,
            smoothing: SmoothingConfig::default(),
            windows: FeatureWindows::default(),
            capacity_tolerance: 0.005,
            rms_points: 1000,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<()> {
        self.smoothing.validate()?;
        self.windows.validate()?;
        if !(self.c_rate.is_finite() && self.c_rate > 0.0) {
            return Err(Error::param(
                "c_rate",
                format!("must be > 0, got {}", self.c_rate),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.shells < 2 {
            return Err(Error::param("shells", "need at least 2"));
        }
        if !(self.capacity_tolerance.is_finite() && self.capacity_tolerance > 0.0) {
            return Err(Error::param("capacity_tolerance", "must be > 0"));
        }
        if self.rms_points < 2 {
            return Err(Error::param("rms_points", "need at least 2"));
        }
        Ok(())
    }

    fn options(&self) -> SimulationOptions {
        SimulationOptions::discharge(self.c_rate, self.dt).with_shells(self.shells)
    }
}

/// A simulated discharge with the quantities the losses need.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub trace: VoltageTrace,
    pub capacity: f64,
    pub features: DcaFeatureSet,
}

pub fn evaluate_cell(cell: &CellParameters, cfg: &EstimationConfig) -> Result<Candidate> {
    let trace = simulate(cell, &cfg.options())?.trace;
    let dca = diagnostic_dca(&trace, &cfg.smoothing)?;
    let features = find_features(&dca, &cfg.windows)?;
    Ok(Candidate {
        capacity: trace.capacity(),
        trace,
        features,
    })
}

/// The measured discharge, preprocessed once per search.
#[derive(Debug, Clone)]
pub struct MeasuredTarget {
    pub capacity: f64,
    pub features: DcaFeatureSet,
    charges: Vec<f64>,
    voltages: Vec<f64>,
    grid: Vec<f64>,
    grid_voltage: Vec<f64>,
}

impl MeasuredTarget {
    pub fn new(measured: &VoltageTrace, cfg: &EstimationConfig) -> Result<Self> {
        measured.validate()?;
        let capacity = measured.capacity();
        if !(capacity > 0.0) {
            return Err(Error::Data("measured trace delivers no charge".into()));
        }
        let dca = diagnostic_dca(measured, &cfg.smoothing)?;
        let features = find_features(&dca, &cfg.windows)?;
        let charges: Vec<f64> = measured.charges().collect();
        let voltages: Vec<f64> = measured.voltages().collect();
        let n = cfg.rms_points;
        let grid: Vec<f64> = (0..n)
            .map(|k| capacity * k as f64 / (n - 1) as f64)
            .collect();
        let grid_voltage = grid
            .iter()
            .map(|&q| interp_monotone(&charges, &voltages, q))
            .collect();
        Ok(Self {
            capacity,
            features,
            charges,
            voltages,
            grid,
            grid_voltage,
        })
    }

    /// Measured voltage at charge `q`, Ah.
    pub fn voltage_at(&self, q: f64) -> f64 {
        interp_monotone(&self.charges, &self.voltages, q)
    }

    pub fn valley_position(&self) -> Result<f64> {
        Ok(self.features.valley()?.position)
    }

    /// RMS voltage difference on a common normalized-capacity grid: the k-th
    /// point compares both traces at the same fraction of their own
    /// capacity, so the steep end-of-discharge tails line up.
    pub fn rms(&self, simulated: &VoltageTrace) -> f64 {
        let q: Vec<f64> = simulated.charges().collect();
        let v: Vec<f64> = simulated.voltages().collect();
        let scale = simulated.capacity() / self.capacity;
        let sum: f64 = self
            .grid
            .iter()
            .zip(&self.grid_voltage)
            .map(|(&qk, &vm)| {
                let d = interp_monotone(&q, &v, qk * scale) - vm;
                d * d
            })
            .sum();
        (sum / self.grid.len() as f64).sqrt()
    }

    pub fn capacity_error(&self, capacity: f64) -> f64 {
        (capacity - self.capacity).abs() / self.capacity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchPoint {
    pub value: f64,
    pub loss: f64,
    /// Simulated capacity of the candidate, Ah.
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: AgingParameter,
    /// 1 for the main sequence, 2 for the optional refinement pass.
    pub pass: u32,
    pub points: Vec<SearchPoint>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageResult {
    pub value: f64,
    pub trace: StageTrace,
    /// False only when no `eps_n` candidate matched the capacity tolerance.
    pub capacity_matched: bool,
}

/// Index of the smallest loss; exact ties go to the value closest to
/// `reference`, then to the earlier index.
pub fn select_candidate(points: &[SearchPoint], reference: f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let q = &points[b];
                let better = p.loss < q.loss
                    || (p.loss == q.loss
                        && (p.value - reference).abs() < (q.value - reference).abs());
                Some(if better { i } else { b })
            }
        };
    }
    best
}

fn check_grid(stage: AgingParameter, grid: &[f64], upper: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param(
            format!("grid.{}", stage.name()),
            "grid is empty",
        ));
    }
    let open_top = stage != AgingParameter::Cn0;
    for &g in grid {
        let ok = g.is_finite() && g > 0.0 && if open_top { g < upper } else { g <= upper };
        if !ok {
            return Err(Error::param(
                format!("grid.{}", stage.name()),
                format!(
                    "candidate {g} outside (0, {upper}{}",
                    if open_top { ")" } else { "]" }
                ),
            ));
        }
    }
    Ok(())
}

fn run_stage<M, L>(
    stage: AgingParameter,
    grid: &[f64],
    reference: f64,
    make_cell: M,
    loss: L,
    cfg: &EstimationConfig,
) -> Result<(usize, StageTrace)>
where
    M: Fn(f64) -> Result<CellParameters> + Sync,
    L: Fn(&Candidate) -> Result<f64> + Sync,
{
    let outcomes: Vec<Result<SearchPoint>> = grid
        .par_iter()
        .map(|&value| {
            let candidate = evaluate_cell(&make_cell(value)?, cfg)?;
            Ok(SearchPoint {
                value,
                loss: loss(&candidate)?,
                capacity: candidate.capacity,
            })
        })
        .collect();
    let mut points = Vec::with_capacity(grid.len());
    let mut skipped = 0;
    for (value, outcome) in grid.iter().zip(outcomes) {
        match outcome {
            Ok(p) => points.push(p),
            Err(e) => {
                skipped += 1;
                log::warn!("{} candidate {value} skipped: {e}", stage.name());
            }
        }
    }
    let best = select_candidate(&points, reference).ok_or_else(|| Error::EstimationFailed {
        stage: stage.name(),
        reason: format!(
            "all {} candidates failed to simulate or lacked features",
            grid.len()
        ),
    })?;
    Ok((
        best,
        StageTrace {
            stage,
            pass: 1,
            points,
            skipped,
        },
    ))
}

/// Picks the `c_n0` whose simulated high-voltage valley sits closest to the
/// measured one; all other parameters stay as in `bol`.
pub fn estimate_cn0(
    bol: &CellParameters,
    measured: &VoltageTrace,
    grid: &[f64],
    cfg: &EstimationConfig,
) -> Result<StageResult> {
    cfg.validate()?;
    let target = MeasuredTarget::new(measured, cfg)?;
    estimate_cn0_with(bol, &target, grid, cfg)
}

pub(crate) fn estimate_cn0_with(
    bol: &CellParameters,
    target: &MeasuredTarget,
    grid: &[f64],
    cfg: &EstimationConfig,
) -> Result<StageResult> {
    check_grid(AgingParameter::Cn0, grid, bol.negative.c_s_max)?;
    let measured_valley = target.valley_position()?;
    let (best, trace) = run_stage(
        AgingParameter::Cn0,
        grid,
        bol.negative.c_0,
        |v| apply_cn0(bol, v),
        |c| Ok((c.features.valley()?.position - measured_valley).abs()),
        cfg,
    )?;
    Ok(StageResult {
        value: trace.points[best].value,
        trace,
        capacity_matched: true,
    })
}

/// Picks `eps_n` among candidates whose capacity matches the measurement,
/// by RMS voltage error. Candidates outside the capacity tolerance carry a
/// dominant penalty, so the search falls back to the closest capacity when
/// none matches.
pub fn estimate_eps_n(
    bol_with_cn0: &CellParameters,
    measured: &VoltageTrace,
    grid: &[f64],
    cfg: &EstimationConfig,
) -> Result<StageResult> {
    cfg.validate()?;
    let target = MeasuredTarget::new(measured, cfg)?;
    estimate_eps_n_with(bol_with_cn0, &target, grid, cfg)
}

/// Stage-2 loss of a candidate with simulated `capacity` and RMS error `rms`.
pub fn capacity_matched_loss(rms: f64, capacity_error: f64, tolerance: f64) -> f64 {
    if capacity_error <= tolerance {
        rms
    } else {
        rms + CAPACITY_PENALTY * capacity_error
    }
}

pub(crate) fn estimate_eps_n_with(
    cell: &CellParameters,
    target: &MeasuredTarget,
    grid: &[f64],
    cfg: &EstimationConfig,
) -> Result<StageResult> {
    check_grid(AgingParameter::EpsN, grid, 1.0)?;
    let tol = cfg.capacity_tolerance;
    let (best, trace) = run_stage(
        AgingParameter::EpsN,
        grid,
        cell.negative.epsilon,
        |v| apply_epsilon(cell, Electrode::Negative, v),
        |c| {
            Ok(capacity_matched_loss(
                target.rms(&c.trace),
                target.capacity_error(c.capacity),
                tol,
            ))
        },
        cfg,
    )?;
    let chosen = trace.points[best];
    Ok(StageResult {
        value: chosen.value,
        capacity_matched: target.capacity_error(chosen.capacity) <= tol,
        trace,
    })
}

/// Picks `eps_p` by RMS voltage error with `c_n0` and `eps_n` held.
pub fn estimate_eps_p(
    cell_after_stage2: &CellParameters,
    measured: &VoltageTrace,
    grid: &[f64],
    cfg: &EstimationConfig,
) -> Result<StageResult> {
    cfg.validate()?;
    let target = MeasuredTarget::new(measured, cfg)?;
    estimate_eps_p_with(cell_after_stage2, &target, grid, cfg)
}

pub(crate) fn estimate_eps_p_with(
    cell: &CellParameters,
    target: &MeasuredTarget,
    grid: &[f64],
    cfg: &EstimationConfig,
) -> Result<StageResult> {
    check_grid(AgingParameter::EpsP, grid, 1.0)?;
    let (best, trace) = run_stage(
        AgingParameter::EpsP,
        grid,
        cell.positive.epsilon,
        |v| apply_epsilon(cell, Electrode::Positive, v),
        |c| Ok(target.rms(&c.trace)),
        cfg,
    )?;
    Ok(StageResult {
        value: trace.points[best].value,
        trace,
        capacity_matched: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(value: f64, loss: f64) -> SearchPoint {
        SearchPoint {
            value,
            loss,
            capacity: 1.0,
        }
    }

    #[test]
    fn selects_minimum() {
        let pts = [pt(1.0, 3.0), pt(2.0, 1.0), pt(3.0, 2.0)];
        assert_eq!(select_candidate(&pts, 3.0), Some(1));
    }

    #[test]
    fn ties_go_towards_reference() {
        let pts = [pt(1.0, 1.0), pt(2.0, 1.0), pt(3.0, 1.0)];
        assert_eq!(select_candidate(&pts, 3.0), Some(2));
        assert_eq!(select_candidate(&pts, 0.0), Some(0));
        assert_eq!(select_candidate(&pts, 2.2), Some(1));
        assert_eq!(select_candidate(&[], 1.0), None);
    }

    #[test]
    fn matched_capacity_always_wins() {
        let tol = 0.005;
        let matched = capacity_matched_loss(0.5, 0.004, tol);
        let unmatched = capacity_matched_loss(0.0, 0.0051, tol);
        assert!(matched < unmatched);
    }

    #[test]
    fn grid_bounds_checked() {
        assert!(check_grid(AgingParameter::EpsN, &[], 1.0).is_err());
        assert!(check_grid(AgingParameter::EpsN, &[0.5, 1.0], 1.0).is_err());
        assert!(check_grid(AgingParameter::Cn0, &[100.0, 200.0], 200.0).is_ok());
        assert!(check_grid(AgingParameter::Cn0, &[0.0], 200.0).is_err());
    }
}
