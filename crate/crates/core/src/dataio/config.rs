use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{open_csv_reader, read_text, schema_error, write_atomic};
use crate::error::{Error, Result};
use crate::format::{fmt_sig, round_sig};
use crate::model::{CellParameters, Electrode, ElectrodeParameters, OcpTable};

pub const OCP_HEADER: [&str; 2] = ["theta", "potential_v"];

/// On-disk form of [`CellParameters`]; OCP tables live in sibling CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfigFile {
    pub negative: ElectrodeParameters,
    pub positive: ElectrodeParameters,
    /// Relative to the directory holding the config file.
    pub ocp_negative_path: PathBuf,
    pub ocp_positive_path: PathBuf,
    pub r_ohmic: f64,
    pub c_electrolyte: f64,
    pub temperature: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nominal_capacity: f64,
}

fn parse_ocp<R: std::io::Read>(reader: R, origin: &Path, tag: Electrode) -> Result<OcpTable> {
    let mut rdr = open_csv_reader(reader);
    let perr = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let headers = rdr
        .headers()
        .map_err(|e| perr(1, format!("unreadable header: {e}")))?;
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != OCP_HEADER {
        return Err(perr(
            1,
            format!(
                "header must be `theta,potential_v`, got `{}`",
                names.join(",")
            ),
        ));
    }
    let mut theta = Vec::new();
    let mut potential = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            perr(
                e.position().map_or(0, |p| p.line()),
                format!("malformed row: {e}"),
            )
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            let raw = record.get(i).unwrap_or("").trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| perr(line, format!("`{raw}` is not a finite number")))
        };
        let (t, u) = (num(0)?, num(1)?);
        if let Some(&prev) = theta.last() {
            if t <= prev {
                return Err(perr(
                    line,
                    format!("theta {t} does not increase (previous {prev})"),
                ));
            }
        }
        theta.push(t);
        potential.push(u);
    }
    OcpTable::new(theta, potential, tag).map_err(|e| perr(0, e.to_string()))
}

pub fn load_ocp_csv(path: impl AsRef<Path>, tag: Electrode) -> Result<OcpTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ocp(file, path, tag)
}

pub fn parse_ocp_csv(text: &str, origin: &Path, tag: Electrode) -> Result<OcpTable> {
    parse_ocp(text.as_bytes(), origin, tag)
}

pub fn save_ocp_csv(table: &OcpTable, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("{}\n", OCP_HEADER.join(","));
    for (t, u) in table.stoichiometry().iter().zip(table.potential()) {
        out.push_str(&format!("{},{}\n", fmt_sig(*t), fmt_sig(*u)));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

fn assemble(
    file: CellConfigFile,
    ocp_negative: OcpTable,
    ocp_positive: OcpTable,
) -> Result<CellParameters> {
    let cell = CellParameters {
        negative: file.negative,
        positive: file.positive,
        ocp_negative,
        ocp_positive,
        r_ohmic: file.r_ohmic,
        c_electrolyte: file.c_electrolyte,
        temperature: file.temperature,
        v_min: file.v_min,
        v_max: file.v_max,
        nominal_capacity: file.nominal_capacity,
    };
    cell.validate()?;
    Ok(cell)
}

pub fn parse_cell_config_file(json: &str, origin: &Path) -> Result<CellConfigFile> {
    let de = &mut serde_json::Deserializer::from_str(json);
    serde_path_to_error::deserialize(de).map_err(|e| schema_error(origin, e))
}

/// Builds a cell from config text and the text of its two OCP tables.
pub fn parse_cell_config(
    json: &str,
    ocp_negative_csv: &str,
    ocp_positive_csv: &str,
    origin: &Path,
) -> Result<CellParameters> {
    let file = parse_cell_config_file(json, origin)?;
    let neg = parse_ocp_csv(
        ocp_negative_csv,
        &origin.with_file_name(&file.ocp_negative_path),
        Electrode::Negative,
    )?;
    let pos = parse_ocp_csv(
        ocp_positive_csv,
        &origin.with_file_name(&file.ocp_positive_path),
        Electrode::Positive,
    )?;
    assemble(file, neg, pos)
}

pub fn load_cell_config(path: impl AsRef<Path>) -> Result<CellParameters> {
    let path = path.as_ref();
    let file = parse_cell_config_file(&read_text(path)?, path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let neg = load_ocp_csv(dir.join(&file.ocp_negative_path), Electrode::Negative)?;
    let pos = load_ocp_csv(dir.join(&file.ocp_positive_path), Electrode::Positive)?;
    assemble(file, neg, pos)
}

fn rounded(e: &ElectrodeParameters) -> ElectrodeParameters {
    let q = round_sig;
    ElectrodeParameters {
        epsilon: q(e.epsilon),
        thickness: q(e.thickness),
        area: q(e.area),
        particle_radius: q(e.particle_radius),
        c_s_max: q(e.c_s_max),
        c_0: q(e.c_0),
        d_s: q(e.d_s),
        k_rxn: q(e.k_rxn),
        theta_0: q(e.theta_0),
        theta_f: q(e.theta_f),
    }
}

/// Writes `path` and the OCP tables next to it as `<stem>_ocp_negative.csv`
/// and `<stem>_ocp_positive.csv`. Numbers are rounded to the export precision.
pub fn save_cell_config(cell: &CellParameters, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let stem = path.file_stem().and_then(|s| s.to_str()).ok_or_else(|| {
        Error::Data(format!(
            "config path {} has no usable file name",
            path.display()
        ))
    })?;
    let neg_name = PathBuf::from(format!("{stem}_ocp_negative.csv"));
    let pos_name = PathBuf::from(format!("{stem}_ocp_positive.csv"));
    let dir = path.parent().unwrap_or(Path::new(""));
    save_ocp_csv(&cell.ocp_negative, dir.join(&neg_name))?;
    save_ocp_csv(&cell.ocp_positive, dir.join(&pos_name))?;
    let file = CellConfigFile {
        negative: rounded(&cell.negative),
        positive: rounded(&cell.positive),
        ocp_negative_path: neg_name,
        ocp_positive_path: pos_name,
        r_ohmic: round_sig(cell.r_ohmic),
        c_electrolyte: round_sig(cell.c_electrolyte),
        temperature: round_sig(cell.temperature),
        v_min: round_sig(cell.v_min),
        v_max: round_sig(cell.v_max),
        nominal_capacity: round_sig(cell.nominal_capacity),
    };
    let mut json = serde_json::to_string_pretty(&file).map_err(|e| Error::Data(e.to_string()))?;
    json.push('\n');
    write_atomic(path, json.as_bytes())
}
