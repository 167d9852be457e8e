//! Mechanism classification and sequential parameter estimation.

mod classify;
mod estimate;
mod pipeline;
mod report;

pub use classify::{classify_mechanisms, DiagnosisThresholds, Evidence, MechanismFlags};
pub use estimate::{
    capacity_matched_loss, estimate_cn0, estimate_eps_n, estimate_eps_p, evaluate_cell,
    select_candidate, Candidate, EstimationConfig, MeasuredTarget, SearchPoint, StageResult,
    StageTrace, CAPACITY_PENALTY,
};
pub use pipeline::{calibrate, diagnose, CalibrationOptions, Diagnosis, GridSpec, SearchGrids};
pub use report::{DegradationReport, EstimatedParameters, REPORT_SCHEMA_VERSION};
