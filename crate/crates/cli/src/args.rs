use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "lidiag",
    version,
    about = "Diagnose Li-ion degradation modes from C/20 discharge curves"
)]
pub struct Cli {
    /// Cap on worker threads for the parameter search.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a constant-current discharge (or charge) and write the trace CSV.
    Simulate(SimulateArgs),
    /// Apply degradation to a cell config; write the aged config and its C/20 trace.
    Inject(InjectArgs),
    /// Compute the dQ/dV curve and its features from a trace.
    Dca(DcaArgs),
    /// Decide which degradation mechanisms a measured discharge shows.
    Diagnose(DiagnoseArgs),
    /// Diagnose and estimate c_n0, eps_n and eps_p; write the report JSON.
    Calibrate(CalibrateArgs),
    /// Print a readable summary of a report JSON.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CellArgs {
    /// Cell config JSON; defaults to the bundled reference cell.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Current as a multiple of the nominal capacity.
    #[arg(long, value_name = "RATE")]
    pub c_rate: Option<f64>,
    /// Output sample interval, s.
    #[arg(long, value_name = "SECONDS")]
    pub dt: Option<f64>,
    /// Radial shells per particle.
    #[arg(long, value_name = "N")]
    pub shells: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// `time_s,current_a,charge_ah,voltage_v` as written by this tool.
    Trace,
    /// `time_s,current_a,voltage_v`; charge is integrated from the current.
    TimeCurrentVoltage,
    /// `charge_ah,voltage_v`.
    CapacityVoltage,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Measured or simulated voltage trace CSV.
    #[arg(long, short, value_name = "FILE")]
    pub input: PathBuf,
    /// Column layout of the input file.
    #[arg(long, value_enum, default_value_t = InputFormat::Trace)]
    pub input_format: InputFormat,
    /// JSON file describing columns, units and direction; overrides --input-format.
    #[arg(long, value_name = "FILE")]
    pub input_spec: Option<PathBuf>,
    /// Minimum number of data rows accepted.
    #[arg(long, value_name = "N")]
    pub min_rows: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SmoothingKind {
    SavitzkyGolay,
    MovingAverage,
    None,
}

#[derive(Debug, Clone, Args)]
pub struct SmoothingArgs {
    #[arg(long, value_enum)]
    pub smoothing: Option<SmoothingKind>,
    /// Smoothing window, odd number of points.
    #[arg(long, value_name = "POINTS")]
    pub window: Option<usize>,
    /// Savitzky-Golay polynomial order.
    #[arg(long, value_name = "ORDER")]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Valley shift that counts as significant, V.
    #[arg(long, value_name = "VOLTS")]
    pub valley_shift: Option<f64>,
    /// Peak magnitude ratio change that counts as significant (fraction).
    #[arg(long, value_name = "FRACTION")]
    pub peak_ratio: Option<f64>,
    /// Valley magnitude ratio change that counts as significant (fraction).
    #[arg(long, value_name = "FRACTION")]
    pub valley_ratio: Option<f64>,
    /// Post-stage-2 valley residual that flags LAM_PE, V.
    #[arg(long, value_name = "VOLTS")]
    pub residual_shift: Option<f64>,
    /// Relative capacity mismatch accepted as a match.
    #[arg(long, value_name = "FRACTION")]
    pub capacity_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Lowest grid value as a fraction of BOL (all three grids).
    #[arg(long, value_name = "FRACTION")]
    pub grid_lower: Option<f64>,
    /// Highest grid value as a fraction of BOL (all three grids).
    #[arg(long, value_name = "FRACTION")]
    pub grid_upper: Option<f64>,
    /// Number of candidates per grid.
    #[arg(long, value_name = "N")]
    pub grid_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub cell: CellArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Charge from the discharged state instead of discharging.
    #[arg(long)]
    pub charge: bool,
    #[arg(long, short, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    #[command(flatten)]
    pub cell: CellArgs,
    /// Lost lithium as a fraction of negative stoichiometry.
    #[arg(long, default_value_t = 0.0, value_name = "FRACTION")]
    pub x_lli: f64,
    /// Lost negative active material, fraction of eps_n.
    #[arg(long, default_value_t = 0.0, value_name = "FRACTION")]
    pub lam_ne: f64,
    /// Lost positive active material, fraction of eps_p.
    #[arg(long, default_value_t = 0.0, value_name = "FRACTION")]
    pub lam_pe: f64,
    /// Set c_n0 (mol/m^3) directly instead of --x-lli.
    #[arg(long, conflicts_with = "x_lli")]
    pub c_n0: Option<f64>,
    /// Set eps_n directly instead of --lam-ne.
    #[arg(long, conflicts_with = "lam_ne")]
    pub eps_n: Option<f64>,
    /// Set eps_p directly instead of --lam-pe.
    #[arg(long, conflicts_with = "lam_pe")]
    pub eps_p: Option<f64>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Aged cell config JSON; OCP tables are written next to it.
    #[arg(long, short, value_name = "FILE")]
    pub out: PathBuf,
    /// Synthetic discharge of the aged cell.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DcaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    /// Resample to this many points on a uniform charge grid first (0: use the raw samples).
    #[arg(long, default_value_t = 1000, value_name = "N")]
    pub resample: usize,
    /// dQ/dV CSV.
    #[arg(long, short, value_name = "FILE")]
    pub out: PathBuf,
    /// Feature JSON.
    #[arg(long, value_name = "FILE")]
    pub features: Option<PathBuf>,
    /// SVG plot of the curve with its features.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub cell: CellArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Flags JSON; printed to stdout when omitted.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub cell: CellArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub grids: GridArgs,
    /// Repeat the stages once with the other parameters at their estimates.
    #[arg(long)]
    pub refine: bool,
    /// Leave the per-candidate search trace out of the report.
    #[arg(long)]
    pub no_trace: bool,
    /// Report JSON; printed to stdout when omitted.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// SVG overlay of measured, fresh and fitted dQ/dV curves.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report JSON written by `calibrate`.
    #[arg(long, short, value_name = "FILE")]
    pub input: PathBuf,
    /// Text file; printed to stdout when omitted.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
