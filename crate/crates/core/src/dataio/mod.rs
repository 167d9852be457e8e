//! File formats: measured traces, cell configs, OCP tables, reports and
//! curve exports. Every writer goes through a temporary file in the target
//! directory and renames it into place, so readers never see partial output.

mod config;
mod export;
mod measurement;
pub mod reference;
mod report_io;
mod svg;

use std::io::Write;
use std::path::Path;

pub use config::{
    load_cell_config, load_ocp_csv, parse_cell_config, parse_cell_config_file, parse_ocp_csv,
    save_cell_config, save_ocp_csv, CellConfigFile, OCP_HEADER,
};
pub use export::{export_dca, export_features, DCA_HEADER};
pub use measurement::{
    load_measurement_spec, load_voltage_csv, parse_voltage_csv, save_trace_csv, ColumnMapping,
    MeasurementFileSpec, MeasurementFormat, UnitDeclarations, DEFAULT_MIN_ROWS, TRACE_HEADER,
};
pub use report_io::{load_report, parse_report, save_report};
pub use svg::{export_plot_svg, render_plot_svg, PlotSeries};

use crate::error::{Error, Result};

pub(crate) fn open_csv_reader<R: std::io::Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

pub(crate) fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(open_csv_reader(file))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn schema_error(
    origin: &Path,
    e: serde_path_to_error::Error<serde_json::Error>,
) -> Error {
    let path = e.path().to_string();
    let inner = e.into_inner();
    Error::Schema {
        field_path: if path == "." { String::new() } else { path },
        message: format!("{}: {inner}", origin.display()),
    }
}

/// Writes `bytes` to `path` via a sibling temporary file and an atomic rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    // Temporary files are private; give the result ordinary file permissions.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = std::fs::metadata(path)
            .map(|m| m.permissions().mode())
            .unwrap_or(0o644);
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(mode))
            .map_err(|e| Error::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
