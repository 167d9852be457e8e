//! Physical constants shared by the model and the degradation map.

/// Faraday constant, C/mol.
pub const FARADAY: f64 = 96485.33;

/// Molar gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314462618;

pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Fixed operating temperature of the reference data, K (25 degC).
pub const REFERENCE_TEMPERATURE: f64 = 298.15;
