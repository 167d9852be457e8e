use std::path::PathBuf;

use thiserror::Error;

use crate::model::Electrode;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Subsystem an error originated from, used by front ends to label messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Model,
    Degradation,
    Ica,
    Diagnose,
    DataIo,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Origin::Model => "model",
            Origin::Degradation => "degradation",
            Origin::Ica => "ica",
            Origin::Diagnose => "diagnose",
            Origin::DataIo => "dataio",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid OCP table: {0}")]
    InvalidTable(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("diffusion step did not converge for dt = {dt} s: {reason}")]
    Numerical { dt: f64, reason: String },

    #[error("{electrode} electrode surface concentration left (0, c_s_max): c_surf = {c_surf:.3} mol/m3")]
    Saturation { electrode: Electrode, c_surf: f64 },

    #[error("simulation did not reach the voltage limit: {0}")]
    LimitNotReached(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("degenerate lithiation window: x_lli = {x_lli} must be below the window {window}")]
    DegenerateWindow { x_lli: f64, window: f64 },

    #[error("feature window error: {0}")]
    Window(String),

    #[error("missing DCA feature: {0}")]
    MissingFeature(&'static str),

    #[error("estimation failed at stage `{stage}`: {reason}")]
    EstimationFailed { stage: &'static str, reason: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("schema error at `{field_path}`: {message}")]
    Schema { field_path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// The subsystem that raised the error.
    pub fn origin(&self) -> Origin {
        match self {
            Error::InvalidTable(_)
            | Error::Domain(_)
            | Error::InvalidParameter { .. }
            | Error::Numerical { .. }
            | Error::Saturation { .. }
            | Error::LimitNotReached(_) => Origin::Model,
            Error::DegenerateWindow { .. } => Origin::Degradation,
            Error::Data(_) | Error::Window(_) | Error::MissingFeature(_) => Origin::Ica,
            Error::EstimationFailed { .. } => Origin::Diagnose,
            Error::Parse { .. } | Error::Schema { .. } | Error::Io { .. } => Origin::DataIo,
        }
    }

    /// True for failures of the numerics or the estimator rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical { .. }
                | Error::Saturation { .. }
                | Error::LimitNotReached(_)
                | Error::EstimationFailed { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
