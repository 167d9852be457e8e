mod common;

use std::path::Path;

use lidiag_core::dataio::reference::{
    reference_cell, reference_dir, ReferenceScenario, CONFIG_FILE,
};
use lidiag_core::dataio::{
    export_dca, export_features, export_plot_svg, load_cell_config, load_measurement_spec,
    load_report, load_voltage_csv, save_cell_config, save_report, save_trace_csv,
    MeasurementFileSpec, PlotSeries,
};
use lidiag_core::degradation::{
    apply_lli, cn0_from_theta0, theta0_from_cn0, AgingParameter, ParameterDelta,
};
use lidiag_core::diagnose::{
    DegradationReport, EstimatedParameters, Evidence, MechanismFlags, SearchPoint, StageTrace,
    REPORT_SCHEMA_VERSION,
};
use lidiag_core::ica::{
    compute_dca, find_features, FeatureChange, FeatureDelta, FeatureWindows, SmoothingConfig,
};
use lidiag_core::model::simulate_constant_current;
use lidiag_core::Error;

fn sample_report() -> DegradationReport {
    DegradationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        flags: MechanismFlags {
            lli: true,
            lam_ne: false,
            lam_pe: true,
            evidence: Evidence {
                lli: Some("valley moved".into()),
                lam_ne: None,
                lam_pe: Some("residual \"large\" <5 mV>".into()),
            },
        },
        estimated: EstimatedParameters {
            c_n0: 26500.0,
            eps_n: 0.561,
            eps_p: 0.52,
        },
        deltas: vec![ParameterDelta::new(AgingParameter::Cn0, 27500.0, 26500.0)],
        fit_rms: 1.0 / 3.0,
        valley_residual: Some(-0.1234567890123),
        capacity_measured: 4.7,
        capacity_simulated: 4.71,
        capacity_matched: true,
        feature_delta: FeatureDelta {
            low_voltage_peak: FeatureChange {
                shift: 0.001,
                ratio: 1.05,
            },
            high_voltage_valley: FeatureChange {
                shift: 0.0123,
                ratio: 0.97,
            },
        },
        stages_run: vec![AgingParameter::Cn0, AgingParameter::EpsP],
        search_trace: Some(vec![StageTrace {
            stage: AgingParameter::Cn0,
            pass: 1,
            points: vec![SearchPoint {
                value: 26500.0,
                loss: 2.0 / 3.0,
                capacity: 4.7,
            }],
            skipped: 0,
        }]),
        incomplete: false,
        failure: None,
    }
    .quantized()
}

#[test]
fn report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("report.json");
    let r = sample_report();
    save_report(&r, &p).unwrap();
    assert_eq!(load_report(&p).unwrap(), r);
    // Without the trace the field is omitted and still reloads.
    let bare = r.clone().without_trace();
    save_report(&bare, &p).unwrap();
    assert!(!std::fs::read_to_string(&p)
        .unwrap()
        .contains("search_trace"));
    assert_eq!(load_report(&p).unwrap(), bare);
}

#[test]
fn report_schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("report.json");
    save_report(&sample_report(), &p).unwrap();
    let text = std::fs::read_to_string(&p)
        .unwrap()
        .replace("\"eps_n\": 0.561", "\"eps_n\": \"oops\"");
    std::fs::write(&p, text).unwrap();
    match load_report(&p) {
        Err(Error::Schema { field_path, .. }) => assert_eq!(field_path, "estimated.eps_n"),
        other => panic!("expected schema error, got {other:?}"),
    }
}

#[test]
fn bundled_config_loads_and_validates() {
    let from_disk = load_cell_config(reference_dir().join(CONFIG_FILE)).unwrap();
    from_disk.validate().unwrap();
    assert_eq!(from_disk, reference_cell().unwrap());
    assert_eq!(from_disk.negative.c_0, 2.75e4);
    assert_eq!(from_disk.negative.epsilon, 0.582);
    assert_eq!(from_disk.positive.epsilon, 0.540);
    assert_eq!(from_disk.positive.c_0, 2.56e4);
    // theta_0 is stored rounded; c_0 is the authoritative value.
    let n = &from_disk.negative;
    assert!((n.c_s_max * n.theta_0 - n.c_0).abs() < 1e-8 * n.c_0);
    let theta = theta0_from_cn0(2.75e4, n.c_s_max).unwrap();
    assert_eq!(cn0_from_theta0(theta, n.c_s_max).unwrap(), 2.75e4);
}

#[test]
fn cell_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("aged.json");
    let cell = apply_lli(&reference_cell().unwrap(), 0.0).unwrap();
    save_cell_config(&cell, &p).unwrap();
    assert!(dir.path().join("aged_ocp_negative.csv").exists());
    assert!(dir.path().join("aged_ocp_positive.csv").exists());
    assert_eq!(load_cell_config(&p).unwrap(), cell);
}

#[test]
fn config_schema_errors_are_field_qualified() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cell.json");
    save_cell_config(&reference_cell().unwrap(), &p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let broken = text.replacen("\"epsilon\"", "\"epsilonn\"", 1);
    std::fs::write(&p, broken).unwrap();
    match load_cell_config(&p) {
        Err(Error::Schema { field_path, .. }) => {
            assert!(field_path.starts_with("negative"), "{field_path}")
        }
        other => panic!("expected schema error, got {other:?}"),
    }
    let invalid = text.replacen("\"epsilon\": 0.582", "\"epsilon\": 1.5", 1);
    std::fs::write(&p, invalid).unwrap();
    assert!(matches!(
        load_cell_config(&p),
        Err(Error::InvalidParameter { .. })
    ));
}

#[test]
fn bundled_traces_load() {
    for s in ReferenceScenario::ALL {
        let embedded = s.trace().unwrap();
        let from_disk =
            load_voltage_csv(s.trace_path(), &MeasurementFileSpec::trace_file()).unwrap();
        assert_eq!(embedded, from_disk);
        assert!(embedded.len() > 1000);
    }
}

#[test]
fn simulated_trace_survives_export() {
    let cell = reference_cell().unwrap();
    let trace = simulate_constant_current(&cell, 0.05, 10.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sim.csv");
    save_trace_csv(&trace, &p).unwrap();
    let back = load_voltage_csv(&p, &MeasurementFileSpec::trace_file()).unwrap();
    assert_eq!(back.len(), trace.len());
    for (a, b) in back.samples.iter().zip(&trace.samples) {
        for (x, y) in [
            (a.time, b.time),
            (a.current, b.current),
            (a.charge_throughput, b.charge_throughput),
            (a.voltage, b.voltage),
        ] {
            assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-300), "{x} vs {y}");
        }
    }
}

#[test]
fn dca_and_feature_exports_have_the_documented_shape() {
    let trace = common::trace_of(400, 5.0, |q| 4.1 - 0.1 * q - 0.05 * (3.0 * q).sin());
    let curve = compute_dca(&trace, &SmoothingConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("dca.csv");
    export_dca(&curve, &csv).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("voltage_v,dq_dv_ah_per_v"));
    assert_eq!(lines.count(), curve.len());

    let windows = FeatureWindows {
        peak_window: [3.5, 3.7],
        valley_window: [3.8, 4.0],
    };
    let features = find_features(&curve, &windows).unwrap();
    let json = dir.path().join("features.json");
    export_features(&features, &json).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v.get("low_voltage_peak").is_some());
    assert!(v.get("high_voltage_valley").is_some());
    assert_eq!(v["search_windows"]["peak_window"][0], 3.5);
}

#[test]
fn svg_has_one_polyline_per_series() {
    let a = common::trace_of(300, 5.0, |q| 4.1 - 0.1 * q - 0.05 * (3.0 * q).sin());
    let b = common::trace_of(300, 4.6, |q| 4.1 - 0.11 * q - 0.05 * (3.2 * q).sin());
    let cfg = SmoothingConfig::default();
    let (ca, cb) = (
        compute_dca(&a, &cfg).unwrap(),
        compute_dca(&b, &cfg).unwrap(),
    );
    let windows = FeatureWindows {
        peak_window: [3.5, 3.7],
        valley_window: [3.8, 4.0],
    };
    let fa = find_features(&ca, &windows).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("plot.svg");
    export_plot_svg(
        &[
            PlotSeries {
                label: "fresh <sim> & co",
                curve: &ca,
                features: Some(&fa),
            },
            PlotSeries {
                label: "aged",
                curve: &cb,
                features: None,
            },
        ],
        &p,
    )
    .unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(
        root.tag_name().namespace(),
        Some("http://www.w3.org/2000/svg")
    );
    let polylines: Vec<_> = root
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .collect();
    assert_eq!(polylines.len(), 2);
    assert_eq!(
        polylines[0].attribute("data-label"),
        Some("fresh <sim> & co")
    );
    for pl in &polylines {
        let pts = pl.attribute("points").unwrap().split_whitespace().count();
        assert!(pts > 100);
    }
    let markers = root
        .descendants()
        .filter(|n| n.has_tag_name("circle"))
        .count();
    let present = [fa.low_voltage_peak, fa.high_voltage_valley]
        .iter()
        .flatten()
        .count();
    assert!(present >= 1);
    assert_eq!(markers, present);
    let kind = if fa.low_voltage_peak.is_some() {
        "peak"
    } else {
        "valley"
    };
    assert!(root
        .descendants()
        .any(|n| n.text().is_some_and(|t| t.contains(kind))));
}

#[test]
fn measurement_spec_json_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("spec.json");
    std::fs::write(
        &p,
        r#"{"format": "capacity_voltage", "columns": {"voltage": "U", "capacity": "Q"}}"#,
    )
    .unwrap();
    let spec = load_measurement_spec(&p).unwrap();
    assert_eq!(spec.min_rows, 10);
    assert_eq!(spec.columns.capacity.as_deref(), Some("Q"));
    std::fs::write(
        &p,
        r#"{"format": "capacity_voltage", "columns": {"voltage": "U"}, "colour": 1}"#,
    )
    .unwrap();
    assert!(matches!(
        load_measurement_spec(&p),
        Err(Error::Schema { .. })
    ));
}

#[test]
fn loaders_fail_closed_with_locations() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("two.csv");
    std::fs::write(&p, "time_s,current_a,voltage_v\n0,1,4.0\n1,1,3.9\n").unwrap();
    let err = load_voltage_csv(&p, &MeasurementFileSpec::time_current_voltage()).unwrap_err();
    assert!(err.to_string().contains("minimum-row rule"), "{err}");
    let missing = load_voltage_csv(
        Path::new("/definitely/not/here.csv"),
        &MeasurementFileSpec::trace_file(),
    );
    assert!(matches!(missing, Err(Error::Io { .. })));
}
