use std::path::Path;

use super::{read_text, schema_error, write_atomic};
use crate::diagnose::{DegradationReport, REPORT_SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Writes the report as pretty JSON, replacing any existing file atomically.
pub fn save_report(report: &DegradationReport, path: impl AsRef<Path>) -> Result<()> {
    let mut json = serde_json::to_string_pretty(&report.clone().quantized())
        .map_err(|e| Error::Data(e.to_string()))?;
    json.push('\n');
    write_atomic(path.as_ref(), json.as_bytes())
}

pub fn parse_report(json: &str, origin: &Path) -> Result<DegradationReport> {
    #[derive(serde::Deserialize)]
    struct Version {
        schema_version: Option<u32>,
    }
    let version: Version = serde_json::from_str(json).map_err(|e| Error::Schema {
        field_path: String::new(),
        message: format!("{}: {e}", origin.display()),
    })?;
    match version.schema_version {
        Some(REPORT_SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::Schema {
                field_path: "schema_version".into(),
                message: format!(
                    "{}: unsupported version {v}, expected {REPORT_SCHEMA_VERSION}",
                    origin.display()
                ),
            })
        }
        None => {
            return Err(Error::Schema {
                field_path: "schema_version".into(),
                message: format!("{}: missing field", origin.display()),
            })
        }
    }
    let de = &mut serde_json::Deserializer::from_str(json);
    serde_path_to_error::deserialize(de).map_err(|e| schema_error(origin, e))
}

pub fn load_report(path: impl AsRef<Path>) -> Result<DegradationReport> {
    let path = path.as_ref();
    parse_report(&read_text(path)?, path)
}
