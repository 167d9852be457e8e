//! Differential capacity (dQ/dV) curves and their diagnostic landmarks: the
//! low-voltage peak near 3.45 V and the high-voltage valley near 3.8 V.

mod curve;
mod features;
mod smoothing;

pub use curve::{
    compute_dca, diagnostic_dca, DcaCurve, DcaSample, DEFAULT_RESAMPLE_POINTS, MIN_VOLTAGE_STEP,
};
pub use features::{
    feature_shift, find_features, DcaFeatureSet, Feature, FeatureChange, FeatureDelta,
    FeatureWindows, VoltageWindow,
};
pub use smoothing::{SmoothingConfig, SmoothingMethod};
