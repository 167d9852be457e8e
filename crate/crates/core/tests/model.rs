mod common;

use lidiag_core::constants::{FARADAY, SECONDS_PER_HOUR};
use lidiag_core::dataio::reference::reference_cell;
use lidiag_core::degradation::{cell_capacity, electrode_capacity, limiting_electrode};
use lidiag_core::model::{
    half_cell_capacity, interp_monotone, ocp_eval, resample_trace, simulate,
    simulate_constant_current, CellParameters, Electrode, ElectrodeParameters, SimulationOptions,
    VoltageTrace,
};
use lidiag_core::Error;

fn bol() -> CellParameters {
    reference_cell().unwrap()
}

/// Ah moved per unit of bulk stoichiometry.
fn ah_per_theta(e: &ElectrodeParameters) -> f64 {
    e.epsilon * e.volume() * e.c_s_max * FARADAY / SECONDS_PER_HOUR
}

/// Bulk stoichiometries after discharging `q` Ah from the charged state.
fn bulk_theta(cell: &CellParameters, q: f64) -> (f64, f64) {
    (
        cell.negative.initial_stoichiometry() - q / ah_per_theta(&cell.negative),
        cell.positive.initial_stoichiometry() + q / ah_per_theta(&cell.positive),
    )
}

#[test]
fn bundled_ocp_matches_hand_interpolated_values() {
    let cell = bol();
    // Linear interpolation between the neighbouring CSV rows, done by hand.
    let golden_n = [
        (0.5, 0.0854351397),
        (0.35713, 0.21999700688),
        (0.116431, 0.37340859334),
        (0.0317, 0.610022110),
    ];
    for (theta, u) in golden_n {
        assert!(
            (ocp_eval(&cell.ocp_negative, theta).unwrap() - u).abs() < 1e-12,
            "theta {theta}"
        );
    }
    let golden_p = [
        (0.5, 4.18802056),
        (0.73337, 4.008605414),
        (0.98765, 3.607106216),
    ];
    for (theta, u) in golden_p {
        assert!(
            (ocp_eval(&cell.ocp_positive, theta).unwrap() - u).abs() < 1e-12,
            "theta {theta}"
        );
    }
}

#[test]
fn bol_capacity_matches_window_formula_and_nominal() {
    let cell = bol();
    let q = simulate_constant_current(&cell, 0.05, 10.0)
        .unwrap()
        .capacity();
    let expected = cell_capacity(&cell);
    assert!((q - expected).abs() / expected < 0.01, "{q} vs {expected}");
    assert!((q - cell.nominal_capacity).abs() / cell.nominal_capacity < 0.01);
    assert_eq!(limiting_electrode(&cell), Electrode::Negative);
}

#[test]
fn discharge_voltage_never_rises() {
    let trace = simulate_constant_current(&bol(), 0.05, 10.0).unwrap();
    let v: Vec<f64> = trace.voltages().collect();
    let worst = v.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
    assert!(worst <= 1e-4, "voltage rose by {worst} V");
    assert!(v.iter().all(|&x| x >= trace_floor(&bol())));
}

fn trace_floor(cell: &CellParameters) -> f64 {
    cell.v_min - 1e-9
}

#[test]
fn lithium_is_conserved() {
    for opts in [
        SimulationOptions::discharge(0.05, 10.0),
        SimulationOptions::discharge(1.0, 5.0),
    ] {
        let out = simulate(&bol(), &opts).unwrap();
        let err = out.balance.max_relative_error();
        assert!(
            err <= 1e-3,
            "c_rate {}: relative imbalance {err}",
            opts.c_rate
        );
    }
}

#[test]
fn capacity_converges_under_refinement() {
    let cell = bol();
    let coarse = simulate(&cell, &SimulationOptions::discharge(0.05, 10.0))
        .unwrap()
        .trace
        .capacity();
    let fine = simulate(
        &cell,
        &SimulationOptions::discharge(0.05, 5.0).with_shells(40),
    )
    .unwrap()
    .trace
    .capacity();
    assert!((coarse - fine).abs() / fine < 0.002, "{coarse} vs {fine}");
}

#[test]
fn slow_discharge_follows_bulk_ocv() {
    let cell = bol();
    let trace = simulate_constant_current(&cell, 0.001, 600.0).unwrap();
    let cap = trace.capacity();
    let mut worst: f64 = 0.0;
    for s in &trace.samples {
        // The last percent runs into the steep negative OCP where the
        // surface/bulk lag is amplified by the slope; compare the rest.
        if s.charge_throughput > 0.99 * cap {
            continue;
        }
        let (tn, tp) = bulk_theta(&cell, s.charge_throughput);
        worst = worst.max((s.voltage - cell.ocv(tn, tp).unwrap()).abs());
    }
    assert!(worst < 1e-3, "max deviation from OCV {worst} V");
}

fn max_signed_gap(cell: &CellParameters, trace: &VoltageTrace, charge: bool) -> f64 {
    let (n0, p0) = if charge {
        lidiag_core::model::discharged_state(cell)
    } else {
        (
            cell.negative.initial_stoichiometry(),
            cell.positive.initial_stoichiometry(),
        )
    };
    let sign = if charge { -1.0 } else { 1.0 };
    trace
        .samples
        .iter()
        .map(|s| {
            let dq = sign * s.charge_throughput;
            let tn = n0 - dq / ah_per_theta(&cell.negative);
            let tp = p0 + dq / ah_per_theta(&cell.positive);
            let ocv = cell.ocv(tn.clamp(0.0, 1.0), tp.clamp(0.0, 1.0)).unwrap();
            // positive when the voltage sits on the wrong side of the OCV
            if charge {
                ocv - s.voltage
            } else {
                s.voltage - ocv
            }
        })
        .fold(f64::MIN, f64::max)
}

#[test]
fn discharge_below_and_charge_above_ocv() {
    let cell = bol();
    let dis = simulate(&cell, &SimulationOptions::discharge(0.05, 10.0))
        .unwrap()
        .trace;
    assert!(max_signed_gap(&cell, &dis, false) < 0.0);
    let chg = simulate(&cell, &SimulationOptions::charge(0.05, 10.0))
        .unwrap()
        .trace;
    assert!(chg.capacity() > 0.9 * cell.nominal_capacity);
    assert!(max_signed_gap(&cell, &chg, true) < 0.0);
}

#[test]
fn resampling_a_simulated_trace_keeps_its_shape() {
    let trace = simulate_constant_current(&bol(), 0.05, 10.0).unwrap();
    let r = resample_trace(&trace, 500).unwrap();
    let (rq, rv): (Vec<f64>, Vec<f64>) = r
        .samples
        .iter()
        .map(|s| (s.charge_throughput, s.voltage))
        .unzip();
    let worst = trace
        .samples
        .iter()
        .map(|s| (interp_monotone(&rq, &rv, s.charge_throughput) - s.voltage).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "max |dV| {worst} V");
}

#[test]
fn negative_half_cell_recovers_window_capacity() {
    let cell = bol();
    let n = &cell.negative;
    let expected = electrode_capacity(n);
    let cutoff = ocp_eval(&cell.ocp_negative, n.theta_f).unwrap();
    let q = half_cell_capacity(
        n,
        &cell.ocp_negative,
        expected / 50.0,
        30.0,
        n.theta_0,
        cutoff,
        true,
        cell.temperature,
        cell.c_electrolyte,
    )
    .unwrap();
    assert!((q - expected).abs() / expected < 0.01, "{q} vs {expected}");
}

#[test]
fn oversized_step_is_a_numerical_error() {
    match simulate_constant_current(&bol(), 0.05, 1e8) {
        Err(Error::Numerical { dt, .. }) => assert_eq!(dt, 1e8),
        other => panic!("expected numerical error, got {other:?}"),
    }
}

#[test]
fn depleted_surface_is_a_saturation_error() {
    let mut cell = bol();
    // Sluggish diffusion at a high rate empties the negative surface.
    cell.negative.d_s = 1e-17;
    match simulate_constant_current(&cell, 1.0, 10.0) {
        Err(Error::Saturation { electrode, .. }) => assert_eq!(electrode, Electrode::Negative),
        other => panic!("expected saturation error, got {other:?}"),
    }
}

#[test]
fn simulation_is_pure_and_thread_safe() {
    let cell = bol();
    let first = simulate_constant_current(&cell, 0.05, 10.0).unwrap();
    let copies: Vec<VoltageTrace> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|_| s.spawn(|| simulate_constant_current(&cell, 0.05, 10.0).unwrap()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for c in copies {
        assert_eq!(c, first);
    }
    assert_eq!(cell, bol());
}

#[test]
fn invalid_inputs_are_rejected_before_simulating() {
    let cell = bol();
    assert!(simulate_constant_current(&cell, 0.0, 10.0).is_err());
    assert!(simulate_constant_current(&cell, 0.05, -1.0).is_err());
    let mut bad = cell.clone();
    bad.v_min = bad.v_max;
    assert!(matches!(
        simulate_constant_current(&bad, 0.05, 10.0),
        Err(Error::InvalidParameter { .. })
    ));
}
