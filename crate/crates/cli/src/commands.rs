use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use lidiag_core::dataio::{
    export_dca, export_features, export_plot_svg, load_cell_config, load_measurement_spec,
    load_report, load_voltage_csv, reference::reference_cell, save_cell_config, save_report,
    save_trace_csv, MeasurementFileSpec, PlotSeries,
};
use lidiag_core::degradation::{
    apply_cn0, apply_epsilon, apply_lam, apply_lli, with_aging_parameters, MechanismMagnitudes,
};
use lidiag_core::diagnose::{calibrate, diagnose, evaluate_cell, CalibrationOptions};
use lidiag_core::ica::{
    compute_dca, diagnostic_dca, find_features, SmoothingConfig, SmoothingMethod,
};
use lidiag_core::model::{
    simulate, CellParameters, Direction, Electrode, SimulationOptions, VoltageTrace,
};
use lidiag_core::Error as CoreError;

use crate::args::*;

/// Exit status and an origin label for an error.
pub fn classify(err: &anyhow::Error) -> (u8, String) {
    match err.chain().find_map(|e| e.downcast_ref::<CoreError>()) {
        Some(core) => (
            if core.is_numerical() { 2 } else { 1 },
            format!(" [{}]", core.origin()),
        ),
        None => (1, String::new()),
    }
}

pub fn run(cli: Cli) -> Result<u8> {
    if let Some(jobs) = cli.jobs {
        anyhow::ensure!(jobs > 0, "--jobs must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Inject(a) => run_inject(a),
        Command::Dca(a) => run_dca(a),
        Command::Diagnose(a) => run_diagnose(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Report(a) => run_report(a),
    }
}

fn load_cell(args: &CellArgs) -> Result<CellParameters> {
    match &args.config {
        Some(p) => {
            load_cell_config(p).with_context(|| format!("loading cell config {}", p.display()))
        }
        None => reference_cell().context("loading the bundled reference cell"),
    }
}

fn load_input(args: &InputArgs) -> Result<VoltageTrace> {
    let mut spec = match &args.input_spec {
        Some(p) => load_measurement_spec(p)
            .with_context(|| format!("loading input spec {}", p.display()))?,
        None => match args.input_format {
            InputFormat::Trace => MeasurementFileSpec::trace_file(),
            InputFormat::TimeCurrentVoltage => MeasurementFileSpec::time_current_voltage(),
            InputFormat::CapacityVoltage => MeasurementFileSpec::capacity_voltage(),
        },
    };
    if let Some(n) = args.min_rows {
        spec.min_rows = n;
    }
    load_voltage_csv(&args.input, &spec)
        .with_context(|| format!("reading {}", args.input.display()))
}

fn smoothing(args: &SmoothingArgs) -> Result<SmoothingConfig> {
    let mut cfg = SmoothingConfig::default();
    if let Some(kind) = args.smoothing {
        cfg.method = match kind {
            SmoothingKind::SavitzkyGolay => SmoothingMethod::SavitzkyGolay,
            SmoothingKind::MovingAverage => SmoothingMethod::MovingAverage,
            SmoothingKind::None => SmoothingMethod::None,
        };
    }
    if let Some(w) = args.window {
        cfg.window_points = w;
    }
    if let Some(o) = args.order {
        cfg.polynomial_order = o;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn options(
    sim: &SimArgs,
    smooth: &SmoothingArgs,
    thresholds: &ThresholdArgs,
    grids: Option<&GridArgs>,
) -> Result<CalibrationOptions> {
    let mut o = CalibrationOptions::default();
    let e = &mut o.estimation;
    e.c_rate = sim.c_rate.unwrap_or(e.c_rate);
    e.dt = sim.dt.unwrap_or(e.dt);
    e.shells = sim.shells.unwrap_or(e.shells);
    e.smoothing = smoothing(smooth)?;
    e.capacity_tolerance = thresholds
        .capacity_tolerance
        .unwrap_or(e.capacity_tolerance);
    let t = &mut o.thresholds;
    t.valley_shift_significant = thresholds
        .valley_shift
        .unwrap_or(t.valley_shift_significant);
    t.peak_ratio_significant = thresholds.peak_ratio.unwrap_or(t.peak_ratio_significant);
    t.valley_ratio_significant = thresholds
        .valley_ratio
        .unwrap_or(t.valley_ratio_significant);
    t.residual_valley_shift = thresholds.residual_shift.unwrap_or(t.residual_valley_shift);
    if let Some(g) = grids {
        for spec in [&mut o.grids.c_n0, &mut o.grids.eps_n, &mut o.grids.eps_p] {
            spec.lower_fraction = g.grid_lower.unwrap_or(spec.lower_fraction);
            spec.upper_fraction = g.grid_upper.unwrap_or(spec.upper_fraction);
            spec.steps = g.grid_steps.unwrap_or(spec.steps);
        }
    }
    o.validate()?;
    Ok(o)
}

fn sim_options(sim: &SimArgs, direction: Direction) -> SimulationOptions {
    let d = lidiag_core::diagnose::EstimationConfig::default();
    let c_rate = sim.c_rate.unwrap_or(d.c_rate);
    let dt = sim.dt.unwrap_or(d.dt);
    let opts = match direction {
        Direction::Discharge => SimulationOptions::discharge(c_rate, dt),
        Direction::Charge => SimulationOptions::charge(c_rate, dt),
    };
    opts.with_shells(sim.shells.unwrap_or(d.shells))
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(&text, out)
}

fn write_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn run_simulate(a: SimulateArgs) -> Result<u8> {
    let direction = if a.charge {
        Direction::Charge
    } else {
        Direction::Discharge
    };
    let opts = sim_options(&a.sim, direction);
    let cell = load_cell(&a.cell)?;
    let out = simulate(&cell, &opts)?;
    save_trace_csv(&out.trace, &a.out)?;
    log::info!(
        "{} samples, {:.4} Ah, final stoichiometries {:.4} / {:.4}",
        out.trace.len(),
        out.trace.capacity(),
        out.final_theta.0,
        out.final_theta.1
    );
    Ok(0)
}

fn run_inject(a: InjectArgs) -> Result<u8> {
    MechanismMagnitudes {
        x_lli: a.x_lli,
        lam_ne: a.lam_ne,
        lam_pe: a.lam_pe,
    }
    .validate()?;
    let opts = sim_options(&a.sim, Direction::Discharge);
    let cell = load_cell(&a.cell)?;
    let aged = match a.c_n0 {
        Some(c) => apply_cn0(&cell, c)?,
        None => apply_lli(&cell, a.x_lli)?,
    };
    let aged = match a.eps_n {
        Some(e) => apply_epsilon(&aged, Electrode::Negative, e)?,
        None => apply_lam(&aged, Electrode::Negative, a.lam_ne)?,
    };
    let aged = match a.eps_p {
        Some(e) => apply_epsilon(&aged, Electrode::Positive, e)?,
        None => apply_lam(&aged, Electrode::Positive, a.lam_pe)?,
    };
    save_cell_config(&aged, &a.out)?;
    if let Some(trace_path) = &a.trace {
        let out = simulate(&aged, &opts)?;
        save_trace_csv(&out.trace, trace_path)?;
        log::info!("aged capacity {:.4} Ah", out.trace.capacity());
    }
    Ok(0)
}

fn run_dca(a: DcaArgs) -> Result<u8> {
    let cfg = smoothing(&a.smoothing)?;
    let windows = lidiag_core::ica::FeatureWindows::default();
    let trace = load_input(&a.input)?;
    let curve = if a.resample == 0 {
        compute_dca(&trace, &cfg)?
    } else {
        let resampled = lidiag_core::model::resample_trace(&trace, a.resample)?;
        compute_dca(&resampled, &cfg)?
    };
    let features = find_features(&curve, &windows)?;
    export_dca(&curve, &a.out)?;
    if let Some(p) = &a.features {
        export_features(&features, p)?;
    }
    if let Some(p) = &a.svg {
        let label = a
            .input
            .input
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("trace");
        export_plot_svg(
            &[PlotSeries {
                label,
                curve: &curve,
                features: Some(&features),
            }],
            p,
        )?;
    }
    Ok(0)
}

fn run_diagnose(a: DiagnoseArgs) -> Result<u8> {
    let opts = options(&a.sim, &a.smoothing, &a.thresholds, None)?;
    let cell = load_cell(&a.cell)?;
    let measured = load_input(&a.input)?;
    let d = diagnose(&cell, &measured, &opts)?;
    write_json(&d.flags, a.out.as_deref())?;
    Ok(0)
}

fn run_calibrate(a: CalibrateArgs) -> Result<u8> {
    let mut opts = options(&a.sim, &a.smoothing, &a.thresholds, Some(&a.grids))?;
    opts.refine = a.refine;
    opts.keep_trace = !a.no_trace;
    let cell = load_cell(&a.cell)?;
    let measured = load_input(&a.input)?;
    let report = calibrate(&cell, &measured, &opts)?;
    match &a.out {
        Some(p) => save_report(&report, p)?,
        None => write_json(&report, None)?,
    }
    if let Some(p) = &a.svg {
        let cfg = &opts.estimation;
        let measured_curve = diagnostic_dca(&measured, &cfg.smoothing)?;
        let measured_features = find_features(&measured_curve, &cfg.windows)?;
        let fresh = evaluate_cell(&cell, cfg)?;
        let fresh_curve = diagnostic_dca(&fresh.trace, &cfg.smoothing)?;
        let est = report.estimated;
        let fitted = evaluate_cell(
            &with_aging_parameters(&cell, est.c_n0, est.eps_n, est.eps_p)?,
            cfg,
        )?;
        let fitted_curve = diagnostic_dca(&fitted.trace, &cfg.smoothing)?;
        export_plot_svg(
            &[
                PlotSeries {
                    label: "measured",
                    curve: &measured_curve,
                    features: Some(&measured_features),
                },
                PlotSeries {
                    label: "fresh model",
                    curve: &fresh_curve,
                    features: None,
                },
                PlotSeries {
                    label: "fitted model",
                    curve: &fitted_curve,
                    features: Some(&fitted.features),
                },
            ],
            p,
        )?;
    }
    if report.incomplete {
        eprintln!(
            "warning: calibration incomplete: {}",
            report.failure.as_deref().unwrap_or("a stage failed")
        );
        return Ok(2);
    }
    Ok(0)
}

fn run_report(a: ReportArgs) -> Result<u8> {
    let report =
        load_report(&a.input).with_context(|| format!("reading report {}", a.input.display()))?;
    write_text(&report.summary(), a.out.as_deref())?;
    Ok(0)
}
