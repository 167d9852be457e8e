use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{open_csv, open_csv_reader, write_atomic};
use crate::constants::SECONDS_PER_HOUR;
use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::model::{Direction, Provenance, TraceSample, VoltageTrace};

pub const DEFAULT_MIN_ROWS: usize = 10;

/// Header written by [`save_trace_csv`].
pub const TRACE_HEADER: [&str; 4] = ["time_s", "current_a", "charge_ah", "voltage_v"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementFormat {
    /// Charge is integrated from current over time.
    TimeCurrentVoltage,
    /// Charge throughput is read directly.
    CapacityVoltage,
}

/// Column names in the file header. `time` and `current` are required for
/// `time_current_voltage` and optional for `capacity_voltage`, where a missing
/// time column is replaced by the row index in seconds and a missing current
/// by zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    pub time: Option<String>,
    pub current: Option<String>,
    pub voltage: String,
    pub capacity: Option<String>,
}

/// Declared units. Only `s`, `A`, `V` and `Ah` are accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitDeclarations {
    pub time: String,
    pub current: String,
    pub voltage: String,
    pub capacity: String,
}

impl Default for UnitDeclarations {
    fn default() -> Self {
        Self {
            time: "s".into(),
            current: "A".into(),
            voltage: "V".into(),
            capacity: "Ah".into(),
        }
    }
}

/// How to read a measurement CSV. In JSON, `units`, `direction` and
/// `min_rows` may be omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFileSpec {
    pub format: MeasurementFormat,
    pub columns: ColumnMapping,
    #[serde(default)]
    pub units: UnitDeclarations,
    #[serde(default = "discharge")]
    pub direction: Direction,
    #[serde(default = "default_min_rows")]
    pub min_rows: usize,
}

fn discharge() -> Direction {
    Direction::Discharge
}

fn default_min_rows() -> usize {
    DEFAULT_MIN_ROWS
}

impl MeasurementFileSpec {
    /// `time_s,current_a,voltage_v`
    pub fn time_current_voltage() -> Self {
        Self {
            format: MeasurementFormat::TimeCurrentVoltage,
            columns: ColumnMapping {
                time: Some("time_s".into()),
                current: Some("current_a".into()),
                voltage: "voltage_v".into(),
                capacity: None,
            },
            units: UnitDeclarations::default(),
            direction: Direction::Discharge,
            min_rows: DEFAULT_MIN_ROWS,
        }
    }

    /// `charge_ah,voltage_v`
    pub fn capacity_voltage() -> Self {
        Self {
            format: MeasurementFormat::CapacityVoltage,
            columns: ColumnMapping {
                time: None,
                current: None,
                voltage: "voltage_v".into(),
                capacity: Some("charge_ah".into()),
            },
            ..Self::time_current_voltage()
        }
    }

    /// The layout written by [`save_trace_csv`]; charge is taken as stored.
    pub fn trace_file() -> Self {
        let mut spec = Self::capacity_voltage();
        spec.columns.time = Some("time_s".into());
        spec.columns.current = Some("current_a".into());
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let u = &self.units;
        for (field, got, want) in [
            ("units.time", &u.time, "s"),
            ("units.current", &u.current, "A"),
            ("units.voltage", &u.voltage, "V"),
            ("units.capacity", &u.capacity, "Ah"),
        ] {
            if got != want {
                return Err(Error::Schema {
                    field_path: field.into(),
                    message: format!("unit `{got}` not supported; use `{want}`"),
                });
            }
        }
        let need = |field: &str, col: &Option<String>| -> Result<()> {
            if col.is_none() {
                return Err(Error::Schema {
                    field_path: format!("columns.{field}"),
                    message: format!("required by the {:?} format", self.format),
                });
            }
            Ok(())
        };
        match self.format {
            MeasurementFormat::TimeCurrentVoltage => {
                need("time", &self.columns.time)?;
                need("current", &self.columns.current)?;
            }
            MeasurementFormat::CapacityVoltage => need("capacity", &self.columns.capacity)?,
        }
        if self.min_rows < 3 {
            return Err(Error::Schema {
                field_path: "min_rows".into(),
                message: "at least 3 rows are needed for a derivative".into(),
            });
        }
        Ok(())
    }
}

struct Row {
    line: u64,
    time: Option<f64>,
    current: Option<f64>,
    voltage: f64,
    capacity: Option<f64>,
}

/// Reads a measured discharge (or charge) log.
pub fn load_voltage_csv(
    path: impl AsRef<Path>,
    spec: &MeasurementFileSpec,
) -> Result<VoltageTrace> {
    let path = path.as_ref();
    spec.validate()?;
    read_voltage(open_csv(path)?, path, spec)
}

/// As [`load_voltage_csv`], from CSV text; `origin` only labels errors.
pub fn parse_voltage_csv(
    text: &str,
    origin: &Path,
    spec: &MeasurementFileSpec,
) -> Result<VoltageTrace> {
    spec.validate()?;
    read_voltage(open_csv_reader(text.as_bytes()), origin, spec)
}

fn read_voltage<R: std::io::Read>(
    mut reader: csv::Reader<R>,
    path: &Path,
    spec: &MeasurementFileSpec,
) -> Result<VoltageTrace> {
    let perr = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| perr(1, format!("unreadable header: {e}")))?
        .clone();
    let index: HashMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();
    let locate = |name: &Option<String>| -> Result<Option<usize>> {
        match name {
            None => Ok(None),
            Some(n) => index.get(n.as_str()).copied().map(Some).ok_or_else(|| {
                perr(
                    1,
                    format!(
                        "missing column `{n}`; header is `{}`",
                        headers.iter().collect::<Vec<_>>().join(",")
                    ),
                )
            }),
        }
    };
    let cols = &spec.columns;
    let (i_time, i_current, i_capacity) = (
        locate(&cols.time)?,
        locate(&cols.current)?,
        locate(&cols.capacity)?,
    );
    let i_voltage = locate(&Some(cols.voltage.clone()))?.expect("voltage column is mandatory");

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            perr(line, format!("malformed row: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: Option<usize>, name: &str| -> Result<Option<f64>> {
            let Some(i) = i else { return Ok(None) };
            let raw = record.get(i).unwrap_or("").trim();
            let v: f64 = raw
                .parse()
                .map_err(|_| perr(line, format!("column `{name}`: `{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(perr(
                    line,
                    format!("column `{name}`: non-finite value `{raw}`"),
                ));
            }
            Ok(Some(v))
        };
        rows.push(Row {
            line,
            time: field(i_time, "time")?,
            current: field(i_current, "current")?,
            voltage: field(Some(i_voltage), "voltage")?.expect("index given"),
            capacity: field(i_capacity, "capacity")?,
        });
    }
    if rows.len() < spec.min_rows {
        return Err(perr(
            rows.last().map_or(1, |r| r.line),
            format!(
                "file has {} data rows; at least {} are required (minimum-row rule)",
                rows.len(),
                spec.min_rows
            ),
        ));
    }

    let mut samples: Vec<TraceSample> = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        let time = r.time.unwrap_or(k as f64);
        let current = r.current.unwrap_or(0.0);
        if let Some(prev) = samples.last() {
            if time <= prev.time {
                return Err(perr(
                    r.line,
                    format!(
                        "time {time} s does not increase (previous {} s){}",
                        prev.time,
                        if time == prev.time {
                            "; duplicated timestamp"
                        } else {
                            ""
                        }
                    ),
                ));
            }
        }
        let charge = match spec.format {
            MeasurementFormat::CapacityVoltage => {
                let q = r.capacity.expect("validated spec maps capacity");
                if q < 0.0 {
                    return Err(perr(r.line, format!("negative charge throughput {q} Ah")));
                }
                if let Some(prev) = samples.last() {
                    if q < prev.charge_throughput {
                        return Err(perr(
                            r.line,
                            format!("charge throughput decreases to {q} Ah"),
                        ));
                    }
                }
                q
            }
            MeasurementFormat::TimeCurrentVoltage => match samples.last() {
                None => 0.0,
                Some(prev) => {
                    prev.charge_throughput
                        + 0.5 * (prev.current.abs() + current.abs()) * (time - prev.time)
                            / SECONDS_PER_HOUR
                }
            },
        };
        samples.push(TraceSample {
            time,
            current,
            charge_throughput: charge,
            voltage: r.voltage,
        });
    }
    VoltageTrace::new(samples, spec.direction, Provenance::Measured)
}

/// Reads a [`MeasurementFileSpec`] from JSON.
pub fn load_measurement_spec(path: impl AsRef<Path>) -> Result<MeasurementFileSpec> {
    let path = path.as_ref();
    let text = super::read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: MeasurementFileSpec =
        serde_path_to_error::deserialize(de).map_err(|e| super::schema_error(path, e))?;
    spec.validate()?;
    Ok(spec)
}

pub fn save_trace_csv(trace: &VoltageTrace, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Data(format!("CSV encoding failed: {e}"));
    w.write_record(TRACE_HEADER).map_err(io)?;
    for s in &trace.samples {
        w.write_record([
            fmt_sig(s.time),
            fmt_sig(s.current),
            fmt_sig(s.charge_throughput),
            fmt_sig(s.voltage),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Data(format!("CSV encoding failed: {e}")))?;
    write_atomic(path.as_ref(), &bytes)
}
