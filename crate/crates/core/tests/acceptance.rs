//! Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
//! Exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::oracle;
use lidiag_core::dataio::reference::{reference_cell, ReferenceScenario};
use lidiag_core::dataio::save_report;
use lidiag_core::degradation::{electrode_capacity, limiting_electrode, with_aging_parameters};
use lidiag_core::diagnose::{
    calibrate, estimate_cn0, estimate_eps_n, estimate_eps_p, CalibrationOptions, DegradationReport,
    SearchGrids,
};
use lidiag_core::ica::{
    compute_dca, diagnostic_dca, feature_shift, find_features, DcaFeatureSet, FeatureWindows,
    SmoothingConfig,
};
use lidiag_core::model::{
    half_cell_capacity, ocp_eval, simulate, simulate_constant_current, CellParameters, Electrode,
    SimulationOptions, VoltageTrace,
};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

/// One default grid step: 0.25 % of the BOL value.
const ROUND_TRIP_TOL: f64 = 0.0025;
const ROUND_TRIP_WALL: Duration = Duration::from_secs(300);
const NULL_RMS: f64 = 0.5e-3;
const LLI_VALLEY_SHIFT: f64 = 5e-3;
const LLI_PEAK_RATIO: f64 = 1.02;
const NE_VALLEY_RATIO: f64 = 0.98;
const PE_CAPACITY_CHANGE: f64 = 0.002;
const FADE_100K: (f64, f64) = (7.80, 2.0);
const FADE_250K: (f64, f64) = (12.96, 2.5);
const HALF_CELL_TOL: f64 = 0.01;
const CONSERVATION_TOL: f64 = 1e-3;
const INTEGRAL_TOL: f64 = 0.01;
const CONVERGENCE_TOL: f64 = 0.002;
const NOISE_SIGMA: f64 = 0.5e-3;
const NOISE_DRIFT: f64 = 10e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn bol() -> CellParameters {
    reference_cell().unwrap()
}

fn c20(cell: &CellParameters) -> VoltageTrace {
    simulate_constant_current(cell, 0.05, 10.0).unwrap()
}

fn features(trace: &VoltageTrace) -> DcaFeatureSet {
    find_features(
        &diagnostic_dca(trace, &SmoothingConfig::default()).unwrap(),
        &FeatureWindows::default(),
    )
    .unwrap()
}

fn round_trip(scenario: ReferenceScenario) -> Outcome {
    let cell = bol();
    let truth = scenario.aging_state();
    let measured =
        c20(&with_aging_parameters(&cell, truth.c_n0, truth.eps_n, truth.eps_p).unwrap());
    let start = Instant::now();
    let r = calibrate(&cell, &measured, &CalibrationOptions::default()).unwrap();
    let wall = start.elapsed();
    let err = [
        (r.estimated.c_n0 - truth.c_n0).abs() / cell.negative.c_0,
        (r.estimated.eps_n - truth.eps_n).abs() / cell.negative.epsilon,
        (r.estimated.eps_p - truth.eps_p).abs() / cell.positive.epsilon,
    ];
    // a hair of slack so an exact one-step miss is not lost to rounding
    let within = err.iter().all(|&e| e <= ROUND_TRIP_TOL * (1.0 + 1e-9));
    let flags = r.flags.lli && r.flags.lam_ne && r.flags.lam_pe;
    Outcome {
        pass: within && flags && wall < ROUND_TRIP_WALL,
        detail: format!(
            "c_n0 {} (true {}, {:.3} steps), eps_n {} ({:.3} steps), eps_p {} ({:.3} steps), flags {}/{}/{}, {:.1} s",
            r.estimated.c_n0,
            truth.c_n0,
            err[0] / ROUND_TRIP_TOL,
            r.estimated.eps_n,
            err[1] / ROUND_TRIP_TOL,
            r.estimated.eps_p,
            err[2] / ROUND_TRIP_TOL,
            r.flags.lli,
            r.flags.lam_ne,
            r.flags.lam_pe,
            wall.as_secs_f64()
        ),
    }
}

fn null_diagnosis() -> Outcome {
    let cell = bol();
    let r = calibrate(&cell, &c20(&cell), &CalibrationOptions::default()).unwrap();
    let no_flags = !(r.flags.lli || r.flags.lam_ne || r.flags.lam_pe);
    let at_bol = r.estimated.c_n0 == cell.negative.c_0
        && r.estimated.eps_n == cell.negative.epsilon
        && r.estimated.eps_p == cell.positive.epsilon;
    Outcome {
        pass: no_flags && at_bol && r.fit_rms < NULL_RMS,
        detail: format!(
            "flags raised {}, at BOL {at_bol}, rms {:.4} mV",
            !no_flags,
            r.fit_rms * 1e3
        ),
    }
}

fn signatures() -> Outcome {
    let cell = bol();
    let fresh = c20(&cell);
    let f0 = features(&fresh);
    let t = ReferenceScenario::Cycles100k.aging_state();
    let (bn, bp) = (cell.negative.epsilon, cell.positive.epsilon);
    let aged = |c_n0, en, ep| c20(&with_aging_parameters(&cell, c_n0, en, ep).unwrap());
    let lli = feature_shift(&f0, &features(&aged(t.c_n0, bn, bp))).unwrap();
    let ne = feature_shift(&f0, &features(&aged(cell.negative.c_0, t.eps_n, bp))).unwrap();
    let pe_trace = aged(cell.negative.c_0, bn, t.eps_p);
    let pe = feature_shift(&f0, &features(&pe_trace)).unwrap();
    let pe_cap = (fresh.capacity() - pe_trace.capacity()).abs() / fresh.capacity();
    let checks = [
        lli.high_voltage_valley.shift > LLI_VALLEY_SHIFT,
        lli.low_voltage_peak.ratio > LLI_PEAK_RATIO,
        ne.high_voltage_valley.ratio < NE_VALLEY_RATIO,
        ne.high_voltage_valley.shift < lli.high_voltage_valley.shift,
        pe.high_voltage_valley.shift < 0.0,
        pe_cap < PE_CAPACITY_CHANGE,
    ];
    Outcome {
        pass: checks.iter().all(|&c| c),
        detail: format!(
            "LLI valley {:+.2} mV peak x{:.4}; LAM_NE valley x{:.4} {:+.2} mV; LAM_PE valley {:+.2} mV capacity {:.3} %",
            lli.high_voltage_valley.shift * 1e3,
            lli.low_voltage_peak.ratio,
            ne.high_voltage_valley.ratio,
            ne.high_voltage_valley.shift * 1e3,
            pe.high_voltage_valley.shift * 1e3,
            pe_cap * 100.0
        ),
    }
}

fn capacity_consistency() -> Outcome {
    let cell = bol();
    let q0 = c20(&cell).capacity();
    let fade = |s: ReferenceScenario| {
        let a = s.aging_state();
        100.0
            * (1.0
                - c20(&with_aging_parameters(&cell, a.c_n0, a.eps_n, a.eps_p).unwrap()).capacity()
                    / q0)
    };
    let (f2, f3) = (
        fade(ReferenceScenario::Cycles100k),
        fade(ReferenceScenario::Cycles250k),
    );
    Outcome {
        pass: (f2 - FADE_100K.0).abs() <= FADE_100K.1 && (f3 - FADE_250K.0).abs() <= FADE_250K.1,
        detail: format!(
            "100k {f2:.2} % (target {}±{}), 250k {f3:.2} % (target {}±{})",
            FADE_100K.0, FADE_100K.1, FADE_250K.0, FADE_250K.1
        ),
    }
}

fn half_cell_oracle() -> Outcome {
    let cell = bol();
    let which = limiting_electrode(&cell);
    let (e, ocp, delithiate) = match which {
        Electrode::Negative => (&cell.negative, &cell.ocp_negative, true),
        Electrode::Positive => (&cell.positive, &cell.ocp_positive, false),
    };
    let expected = electrode_capacity(e);
    let cutoff = ocp_eval(ocp, e.theta_f).unwrap();
    let q = half_cell_capacity(
        e,
        ocp,
        expected / 50.0,
        30.0,
        e.theta_0,
        cutoff,
        delithiate,
        cell.temperature,
        cell.c_electrolyte,
    )
    .unwrap();
    let rel = (q - expected).abs() / expected;
    Outcome {
        pass: rel <= HALF_CELL_TOL,
        detail: format!(
            "{which:?} electrode: window {expected:.5} Ah, C/50 coulomb count {q:.5} Ah ({:.3} %)",
            rel * 100.0
        ),
    }
}

fn stage_oracle() -> Outcome {
    let cell = bol();
    let opts = CalibrationOptions::default();
    let cfg = &opts.estimation;
    let grids = SearchGrids::default();
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for scenario in [ReferenceScenario::Cycles100k, ReferenceScenario::Cycles250k] {
        let measured = scenario.trace().unwrap();
        let valley = features(&measured).valley().unwrap().position;
        let mut s = oracle::State {
            c_n0: cell.negative.c_0,
            eps_n: cell.negative.epsilon,
            eps_p: cell.positive.epsilon,
        };
        let at =
            |s: &oracle::State| with_aging_parameters(&cell, s.c_n0, s.eps_n, s.eps_p).unwrap();

        let grid = grids.c_n0.values(cell.negative.c_0);
        let lib = estimate_cn0(&at(&s), &measured, &grid, cfg).unwrap().value;
        let brute = oracle::stage_cn0(&cell, &s, &grid, valley);
        if brute != Some(lib) {
            mismatches.push(format!("{} c_n0 {lib} vs {brute:?}", scenario.name()));
        }
        s.c_n0 = lib;

        let grid = grids.eps_n.values(cell.negative.epsilon);
        let lib = estimate_eps_n(&at(&s), &measured, &grid, cfg)
            .unwrap()
            .value;
        let brute = oracle::stage_eps_n(&cell, &s, &grid, &measured, cfg.capacity_tolerance);
        if brute != Some(lib) {
            mismatches.push(format!("{} eps_n {lib} vs {brute:?}", scenario.name()));
        }
        s.eps_n = lib;

        let grid = grids.eps_p.values(cell.positive.epsilon);
        let lib = estimate_eps_p(&at(&s), &measured, &grid, cfg)
            .unwrap()
            .value;
        let brute = oracle::stage_eps_p(&cell, &s, &grid, &measured);
        if brute != Some(lib) {
            mismatches.push(format!("{} eps_p {lib} vs {brute:?}", scenario.name()));
        }
        compared += 3;
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            format!("{compared} stages match the exhaustive search exactly")
        } else {
            mismatches.join("; ")
        },
    }
}

fn numerics() -> Outcome {
    let cell = bol();
    let out = simulate(&cell, &SimulationOptions::discharge(0.05, 10.0)).unwrap();
    let conservation = out.balance.max_relative_error();
    let trace = out.trace;
    let curve = compute_dca(&trace, &SmoothingConfig::none()).unwrap();
    let integral = (curve.integral() - trace.capacity()).abs() / trace.capacity();
    let fine = simulate(
        &cell,
        &SimulationOptions::discharge(0.05, 5.0).with_shells(40),
    )
    .unwrap()
    .trace
    .capacity();
    let convergence = (trace.capacity() - fine).abs() / fine;
    let clean = features(&trace);
    let normal = Normal::new(0.0, NOISE_SIGMA).unwrap();
    let mut drift: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut noisy = trace.clone();
        for s in &mut noisy.samples {
            s.voltage += normal.sample(&mut rng);
        }
        let f = features(&noisy);
        drift = drift
            .max((f.peak().unwrap().position - clean.peak().unwrap().position).abs())
            .max((f.valley().unwrap().position - clean.valley().unwrap().position).abs());
    }
    Outcome {
        pass: conservation <= CONSERVATION_TOL
            && integral <= INTEGRAL_TOL
            && convergence <= CONVERGENCE_TOL
            && drift <= NOISE_DRIFT,
        detail: format!(
            "lithium imbalance {:.2e}, dQ/dV integral {:.3} %, grid convergence {:.3} %, noise drift {:.2} mV",
            conservation,
            integral * 100.0,
            convergence * 100.0,
            drift * 1e3
        ),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let measured = ReferenceScenario::Cycles250k.trace().unwrap();
    let run = |name: &str| {
        let r: DegradationReport =
            calibrate(&bol(), &measured, &CalibrationOptions::default()).unwrap();
        let p = dir.path().join(name);
        save_report(&r, &p).unwrap();
        std::fs::read(p).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    Outcome {
        pass: a == b,
        detail: format!("{} and {} bytes", a.len(), b.len()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("round trip, 100k cycles", || {
            round_trip(ReferenceScenario::Cycles100k)
        }),
        ("round trip, 250k cycles", || {
            round_trip(ReferenceScenario::Cycles250k)
        }),
        ("null diagnosis", null_diagnosis),
        ("directional signatures", signatures),
        ("capacity consistency", capacity_consistency),
        ("half-cell capacity oracle", half_cell_oracle),
        ("grid-search oracle", stage_oracle),
        ("conservation and numerics", numerics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
