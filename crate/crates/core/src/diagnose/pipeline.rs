use serde::{Deserialize, Serialize};

use super::classify::{classify_mechanisms, DiagnosisThresholds, MechanismFlags};
use super::estimate::{
    estimate_cn0_with, estimate_eps_n_with, estimate_eps_p_with, evaluate_cell, EstimationConfig,
    MeasuredTarget, StageResult, StageTrace,
};
use super::report::{DegradationReport, EstimatedParameters, REPORT_SCHEMA_VERSION};
use crate::degradation::{apply_cn0, apply_epsilon, degradation_deltas, AgingParameter};
use crate::error::{Error, Result};
use crate::ica::{feature_shift, FeatureDelta};
use crate::model::{CellParameters, Electrode, VoltageTrace};

/// Candidate grid as fractions of the BOL value, evenly spaced, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower_fraction: f64,
    pub upper_fraction: f64,
    pub steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lower_fraction: 0.85,
            upper_fraction: 1.0,
            steps: 61,
        }
    }
}

impl GridSpec {
    pub fn validate(&self, name: &str) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::param(
                format!("grid.{name}.steps"),
                "need at least 2 steps",
            ));
        }
        if !(self.lower_fraction > 0.0
            && self.lower_fraction < self.upper_fraction
            && self.upper_fraction.is_finite())
        {
            return Err(Error::param(
                format!("grid.{name}"),
                format!(
                    "need 0 < lower_fraction < upper_fraction, got {} and {}",
                    self.lower_fraction, self.upper_fraction
                ),
            ));
        }
        Ok(())
    }

    /// Candidate values; the endpoints are exactly `lower * bol` and `upper * bol`.
    pub fn values(&self, bol: f64) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                let f = if i + 1 == n {
                    self.upper_fraction
                } else {
                    self.lower_fraction
                        + (self.upper_fraction - self.lower_fraction) * i as f64 / (n - 1) as f64
                };
                f * bol
            })
            .collect()
    }

    /// Spacing between neighbouring candidates for the given BOL value.
    pub fn step(&self, bol: f64) -> f64 {
        (self.upper_fraction - self.lower_fraction) * bol / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchGrids {
    pub c_n0: GridSpec,
    pub eps_n: GridSpec,
    pub eps_p: GridSpec,
}

impl SearchGrids {
    pub fn validate(&self) -> Result<()> {
        self.c_n0.validate("c_n0")?;
        self.eps_n.validate("eps_n")?;
        self.eps_p.validate("eps_p")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub thresholds: DiagnosisThresholds,
    pub estimation: EstimationConfig,
    pub grids: SearchGrids,
    /// Repeat the three stages once with the other parameters at their estimates.
    pub refine: bool,
    pub keep_trace: bool,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            thresholds: DiagnosisThresholds::default(),
            estimation: EstimationConfig::default(),
            grids: SearchGrids::default(),
            refine: false,
            keep_trace: true,
        }
    }
}

impl CalibrationOptions {
    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        self.estimation.validate()?;
        self.grids.validate()
    }
}

/// Feature comparison of a measured discharge against the simulated fresh cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosis {
    pub flags: MechanismFlags,
    pub delta: FeatureDelta,
}

/// Necessity step only: classification from the feature deltas.
pub fn diagnose(
    bol: &CellParameters,
    measured: &VoltageTrace,
    opts: &CalibrationOptions,
) -> Result<Diagnosis> {
    opts.validate()?;
    let target = MeasuredTarget::new(measured, &opts.estimation)?;
    diagnose_with(bol, &target, opts)
}

fn diagnose_with(
    bol: &CellParameters,
    target: &MeasuredTarget,
    opts: &CalibrationOptions,
) -> Result<Diagnosis> {
    let fresh = evaluate_cell(bol, &opts.estimation)?;
    let delta = feature_shift(&fresh.features, &target.features)?;
    Ok(Diagnosis {
        flags: classify_mechanisms(&delta, &opts.thresholds),
        delta,
    })
}

struct Progress {
    cell: CellParameters,
    stages_run: Vec<AgingParameter>,
    traces: Vec<StageTrace>,
    capacity_matched: bool,
    failure: Option<String>,
}

impl Progress {
    /// Records a stage outcome; returns false once a stage has failed.
    fn record(
        &mut self,
        pass: u32,
        outcome: Result<StageResult>,
        apply: impl Fn(&CellParameters, f64) -> Result<CellParameters>,
    ) -> Result<bool> {
        match outcome {
            Ok(mut r) => {
                r.trace.pass = pass;
                self.stages_run.push(r.trace.stage);
                if r.trace.stage == AgingParameter::EpsN {
                    self.capacity_matched = r.capacity_matched;
                }
                self.cell = apply(&self.cell, r.value)?;
                self.traces.push(r.trace);
                Ok(true)
            }
            Err(e @ Error::EstimationFailed { .. }) => {
                self.failure = Some(e.to_string());
                Ok(false)
            }
            Err(e) => Err(e),
        }
    }
}

fn set_eps_n(c: &CellParameters, v: f64) -> Result<CellParameters> {
    apply_epsilon(c, Electrode::Negative, v)
}

fn set_eps_p(c: &CellParameters, v: f64) -> Result<CellParameters> {
    apply_epsilon(c, Electrode::Positive, v)
}

/// Full diagnosis: classification, then `c_n0`, `eps_n` and `eps_p` in that
/// order, each stage only when the evidence calls for it.
///
/// A stage in which every candidate fails ends the sequence; the report then
/// holds the estimates of the completed stages and is marked incomplete.
pub fn calibrate(
    bol: &CellParameters,
    measured: &VoltageTrace,
    opts: &CalibrationOptions,
) -> Result<DegradationReport> {
    opts.validate()?;
    bol.validate()?;
    let cfg = &opts.estimation;
    let target = MeasuredTarget::new(measured, cfg)?;
    let Diagnosis { mut flags, delta } = diagnose_with(bol, &target, opts)?;
    let measured_valley = target.valley_position()?;

    let grid_cn0 = opts.grids.c_n0.values(bol.negative.c_0);
    let grid_eps_n = opts.grids.eps_n.values(bol.negative.epsilon);
    let grid_eps_p = opts.grids.eps_p.values(bol.positive.epsilon);

    let mut p = Progress {
        cell: bol.clone(),
        stages_run: Vec::new(),
        traces: Vec::new(),
        capacity_matched: true,
        failure: None,
    };

    let mut ok = true;
    if flags.lli {
        ok = p.record(
            1,
            estimate_cn0_with(&p.cell, &target, &grid_cn0, cfg),
            apply_cn0,
        )?;
    }

    if ok {
        let current = evaluate_cell(&p.cell, cfg)?;
        let unexplained = target.capacity_error(current.capacity) > cfg.capacity_tolerance;
        p.capacity_matched = !unexplained;
        if flags.lam_ne || unexplained {
            ok = p.record(
                1,
                estimate_eps_n_with(&p.cell, &target, &grid_eps_n, cfg),
                set_eps_n,
            )?;
        }
    }

    if ok {
        let current = evaluate_cell(&p.cell, cfg)?;
        if let Some(valley) = current.features.high_voltage_valley {
            let residual = valley.position - measured_valley;
            if residual > opts.thresholds.residual_valley_shift {
                flags.lam_pe = true;
                flags.evidence.lam_pe = Some(format!(
                    "with c_n0 and eps_n fitted the simulated valley sits {:+.2} mV from the measured one (> {:.2} mV)",
                    residual * 1e3,
                    opts.thresholds.residual_valley_shift * 1e3
                ));
                ok = p.record(
                    1,
                    estimate_eps_p_with(&p.cell, &target, &grid_eps_p, cfg),
                    set_eps_p,
                )?;
            }
        }
    }

    if ok && opts.refine && !p.stages_run.is_empty() {
        if flags.lli && ok {
            ok = p.record(
                2,
                estimate_cn0_with(&p.cell, &target, &grid_cn0, cfg),
                apply_cn0,
            )?;
        }
        if p.stages_run.contains(&AgingParameter::EpsN) && ok {
            ok = p.record(
                2,
                estimate_eps_n_with(&p.cell, &target, &grid_eps_n, cfg),
                set_eps_n,
            )?;
        }
        if flags.lam_pe && ok {
            p.record(
                2,
                estimate_eps_p_with(&p.cell, &target, &grid_eps_p, cfg),
                set_eps_p,
            )?;
        }
    }

    let fit = evaluate_cell(&p.cell, cfg)?;
    let valley_residual = fit
        .features
        .high_voltage_valley
        .map(|v| v.position - measured_valley);
    let capacity_matched =
        p.capacity_matched && target.capacity_error(fit.capacity) <= cfg.capacity_tolerance;

    let report = DegradationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        flags,
        estimated: EstimatedParameters {
            c_n0: p.cell.negative.c_0,
            eps_n: p.cell.negative.epsilon,
            eps_p: p.cell.positive.epsilon,
        },
        deltas: degradation_deltas(bol, &p.cell),
        fit_rms: target.rms(&fit.trace),
        valley_residual,
        capacity_measured: target.capacity,
        capacity_simulated: fit.capacity,
        capacity_matched,
        feature_delta: delta,
        stages_run: p.stages_run,
        search_trace: opts.keep_trace.then_some(p.traces),
        incomplete: p.failure.is_some(),
        failure: p.failure,
    };
    Ok(report.quantized())
}
