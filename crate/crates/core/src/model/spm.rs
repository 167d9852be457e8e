//! Single-particle model under constant current.
//!
//! Each electrode is one sphere discretized into equal-thickness finite-volume
//! shells. Diffusion is integrated with explicit Euler; every output step is
//! split into as many sub-steps as the stability bound of the coarsest shell
//! requires. Kinetics are symmetric Butler-Volmer, the electrolyte is held at a
//! fixed concentration and all remaining resistance is lumped into `r_ohmic`.

use super::ocp::{Electrode, OcpTable};
use super::params::{CellParameters, ElectrodeParameters};
use super::trace::{Direction, Provenance, TraceSample, VoltageTrace};
use crate::constants::{FARADAY, GAS_CONSTANT, SECONDS_PER_HOUR};
use crate::error::{Error, Result};

pub const DEFAULT_SHELLS: usize = 20;

/// Output step used by the diagnosis pipeline for C/20 simulations, s.
pub const DEFAULT_DT: f64 = 10.0;

/// Rate of the slow capacity test everything is diagnosed from.
pub const DIAGNOSTIC_C_RATE: f64 = 0.05;

const STABILITY_SAFETY: f64 = 0.9;
const MAX_SUBSTEPS: usize = 1_000_000;
/// Simulations stop with an error after this many nominal durations.
const MAX_DURATION_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub c_rate: f64,
    /// Output step, s.
    pub dt: f64,
    pub direction: Direction,
    pub shells: usize,
    /// Bulk starting stoichiometries `(theta_n, theta_p)`. Discharges default
    /// to the charged state from `c_0`, charges to the discharged end of the
    /// negative window with lithium conserved.
    pub initial_theta: Option<(f64, f64)>,
}

impl SimulationOptions {
    pub fn discharge(c_rate: f64, dt: f64) -> Self {
        Self {
            c_rate,
            dt,
            direction: Direction::Discharge,
            shells: DEFAULT_SHELLS,
            initial_theta: None,
        }
    }

    pub fn charge(c_rate: f64, dt: f64) -> Self {
        Self {
            direction: Direction::Charge,
            ..Self::discharge(c_rate, dt)
        }
    }

    pub fn with_shells(mut self, shells: usize) -> Self {
        self.shells = shells;
        self
    }

    pub fn starting_at(mut self, theta_n: f64, theta_p: f64) -> Self {
        self.initial_theta = Some((theta_n, theta_p));
        self
    }
}

/// Lithium moved by a simulation, mol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LithiumBalance {
    /// Net lithium leaving the negative particle population.
    pub negative_released: f64,
    /// Net lithium entering the positive particle population.
    pub positive_absorbed: f64,
    /// Integral of the applied current divided by F.
    pub coulombic: f64,
}

impl LithiumBalance {
    /// Largest relative deviation of either electrode from the coulombic total.
    pub fn max_relative_error(&self) -> f64 {
        let scale = self.coulombic.abs().max(f64::MIN_POSITIVE);
        ((self.negative_released - self.coulombic).abs() / scale)
            .max((self.positive_absorbed - self.coulombic).abs() / scale)
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub trace: VoltageTrace,
    /// Evaluated at the end of the last integrated step, which may lie just
    /// past the interpolated limit crossing.
    pub balance: LithiumBalance,
    /// Bulk stoichiometries at the end of the last integrated step.
    pub final_theta: (f64, f64),
}

/// Discharges (or charges) the cell at constant current until a voltage limit.
pub fn simulate_constant_current(
    cell: &CellParameters,
    c_rate: f64,
    dt: f64,
) -> Result<VoltageTrace> {
    simulate(cell, &SimulationOptions::discharge(c_rate, dt)).map(|o| o.trace)
}

/// Bulk stoichiometries of the discharged cell implied by the negative window.
pub fn discharged_state(cell: &CellParameters) -> (f64, f64) {
    let n = &cell.negative;
    let p = &cell.positive;
    let moles = (n.theta_0 - n.theta_f) * n.epsilon * n.volume() * n.c_s_max;
    let theta_p = p.initial_stoichiometry() + moles / (p.epsilon * p.volume() * p.c_s_max);
    (n.theta_f, theta_p.min(1.0))
}

pub fn simulate(cell: &CellParameters, opts: &SimulationOptions) -> Result<SimulationOutcome> {
    cell.validate()?;
    if !(opts.c_rate.is_finite() && opts.c_rate > 0.0) {
        return Err(Error::Domain(format!(
            "c_rate must be > 0, got {}",
            opts.c_rate
        )));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::Domain(format!("dt must be > 0, got {}", opts.dt)));
    }
    if opts.shells < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 radial shells, got {}",
            opts.shells
        )));
    }

    let (theta_n0, theta_p0) = match (opts.initial_theta, opts.direction) {
        (Some(t), _) => t,
        (None, Direction::Discharge) => (
            cell.negative.initial_stoichiometry(),
            cell.positive.initial_stoichiometry(),
        ),
        (None, Direction::Charge) => discharged_state(cell),
    };
    for (tag, th) in [
        (Electrode::Negative, theta_n0),
        (Electrode::Positive, theta_p0),
    ] {
        if !(th > 0.0 && th < 1.0) {
            return Err(Error::Domain(format!(
                "initial {tag} stoichiometry {th} outside (0, 1)"
            )));
        }
    }

    // Discharge positive.
    let current = match opts.direction {
        Direction::Discharge => opts.c_rate * cell.nominal_capacity,
        Direction::Charge => -opts.c_rate * cell.nominal_capacity,
    };

    let mut neg = Particle::new(&cell.negative, opts.shells, theta_n0);
    let mut pos = Particle::new(&cell.positive, opts.shells, theta_p0);
    let kin = Kinetics::new(cell);
    // Outward molar flux at the particle surface, mol/(m^2 s).
    let j_neg = current / (FARADAY * cell.negative.interfacial_area());
    let j_pos = -current / (FARADAY * cell.positive.interfacial_area());

    let substeps_neg = substeps(opts.dt, neg.dt_stable)?;
    let substeps_pos = substeps(opts.dt, pos.dt_stable)?;
    let h_neg = opts.dt / substeps_neg as f64;
    let h_pos = opts.dt / substeps_pos as f64;

    let moles_neg0 = neg.moles(&cell.negative);
    let moles_pos0 = pos.moles(&cell.positive);

    let v0 = kin.voltage(cell, current, &neg, j_neg, &pos, j_pos)?;
    let past_limit = |v: f64| match opts.direction {
        Direction::Discharge => v <= cell.v_min,
        Direction::Charge => v >= cell.v_max,
    };
    let limit = match opts.direction {
        Direction::Discharge => cell.v_min,
        Direction::Charge => cell.v_max,
    };
    if past_limit(v0) {
        return Err(Error::Domain(format!(
            "cell starts at {v0:.4} V, already beyond the {limit} V limit"
        )));
    }

    let nominal_duration = SECONDS_PER_HOUR / opts.c_rate;
    let amp_hours_per_step = current.abs() * opts.dt / SECONDS_PER_HOUR;
    let mut samples = Vec::with_capacity((nominal_duration / opts.dt) as usize + 2);
    samples.push(TraceSample {
        time: 0.0,
        current,
        charge_throughput: 0.0,
        voltage: v0,
    });

    let mut step: u64 = 0;
    loop {
        for _ in 0..substeps_neg {
            neg.advance(h_neg, j_neg);
        }
        for _ in 0..substeps_pos {
            pos.advance(h_pos, j_pos);
        }
        step += 1;
        let time = step as f64 * opts.dt;
        let charge = step as f64 * amp_hours_per_step;
        let v = kin.voltage(cell, current, &neg, j_neg, &pos, j_pos)?;
        let prev = *samples.last().expect("trace seeded with t = 0");

        if past_limit(v) {
            let frac = (prev.voltage - limit) / (prev.voltage - v);
            let frac = frac.clamp(0.0, 1.0);
            // A crossing this close to the previous sample would duplicate it
            // once times are written at nine significant digits.
            if frac > 1e-3 {
                samples.push(TraceSample {
                    time: prev.time + frac * opts.dt,
                    current,
                    charge_throughput: prev.charge_throughput + frac * amp_hours_per_step,
                    voltage: limit,
                });
            }
            let balance = LithiumBalance {
                negative_released: moles_neg0 - neg.moles(&cell.negative),
                positive_absorbed: pos.moles(&cell.positive) - moles_pos0,
                coulombic: current * time / FARADAY,
            };
            let final_theta = (neg.mean_stoichiometry(), pos.mean_stoichiometry());
            let trace = VoltageTrace::new(samples, opts.direction, Provenance::Simulated)?;
            return Ok(SimulationOutcome {
                trace,
                balance,
                final_theta,
            });
        }

        samples.push(TraceSample {
            time,
            current,
            charge_throughput: charge,
            voltage: v,
        });
        if time > MAX_DURATION_FACTOR * nominal_duration {
            return Err(Error::LimitNotReached(format!(
                "still at {v:.4} V after {:.1} h",
                time / SECONDS_PER_HOUR
            )));
        }
    }
}

fn substeps(dt: f64, dt_stable: f64) -> Result<usize> {
    let n = (dt / dt_stable).ceil();
    if !n.is_finite() || n > MAX_SUBSTEPS as f64 {
        return Err(Error::Numerical {
            dt,
            reason: format!(
                "explicit diffusion needs {n} sub-steps of at most {dt_stable:.3e} s (limit {MAX_SUBSTEPS})"
            ),
        });
    }
    Ok((n as usize).max(1))
}

/// Constant-current sweep of one electrode against a lithium reference.
///
/// The electrode is delithiated (`delithiate = true`) or lithiated from
/// `theta_start` until its potential crosses `cutoff`. Returns the charge
/// passed in Ah, interpolated to the crossing.
pub fn half_cell_capacity(
    params: &ElectrodeParameters,
    ocp: &OcpTable,
    current: f64,
    dt: f64,
    theta_start: f64,
    cutoff: f64,
    delithiate: bool,
    temperature: f64,
    c_electrolyte: f64,
) -> Result<f64> {
    if !(current > 0.0 && dt > 0.0) {
        return Err(Error::Domain("current and dt must be > 0".into()));
    }
    let tag = ocp.electrode();
    let mut particle = Particle::new(params, DEFAULT_SHELLS, theta_start);
    let j = if delithiate { current } else { -current } / (FARADAY * params.interfacial_area());
    let n_sub = substeps(dt, particle.dt_stable)?;
    let h = dt / n_sub as f64;
    let potential = |p: &Particle| -> Result<f64> {
        let cs = p.surface(j);
        if !(cs > 0.0 && cs < params.c_s_max) {
            return Err(Error::Saturation {
                electrode: tag,
                c_surf: cs,
            });
        }
        let i0 = exchange_current(params.k_rxn, c_electrolyte, cs, params.c_s_max);
        let eta = 2.0 * GAS_CONSTANT * temperature / FARADAY * (j * FARADAY / (2.0 * i0)).asinh();
        Ok(ocp.lookup(cs / params.c_s_max).potential + eta)
    };
    let crossed = |u: f64| if delithiate { u >= cutoff } else { u <= cutoff };
    let ah_per_step = current * dt / SECONDS_PER_HOUR;
    let mut prev = potential(&particle)?;
    if crossed(prev) {
        return Err(Error::Domain(format!(
            "electrode starts beyond the {cutoff} V cutoff"
        )));
    }
    let max_steps = (1e7 as u64).max((MAX_DURATION_FACTOR * 1e6 / dt) as u64);
    for step in 1..=max_steps {
        for _ in 0..n_sub {
            particle.advance(h, j);
        }
        let u = potential(&particle)?;
        if crossed(u) {
            let frac = ((prev - cutoff) / (prev - u)).clamp(0.0, 1.0);
            return Ok((step as f64 - 1.0 + frac) * ah_per_step);
        }
        prev = u;
    }
    Err(Error::LimitNotReached(format!(
        "{tag} half cell never reached {cutoff} V"
    )))
}

fn exchange_current(k_rxn: f64, c_e: f64, c_surf: f64, c_max: f64) -> f64 {
    FARADAY * k_rxn * c_e.sqrt() * (c_surf * (c_max - c_surf)).sqrt()
}

struct Kinetics {
    thermal: f64,
    i_scale_neg: f64,
    i_scale_pos: f64,
}

impl Kinetics {
    fn new(cell: &CellParameters) -> Self {
        Self {
            thermal: 2.0 * GAS_CONSTANT * cell.temperature / FARADAY,
            i_scale_neg: 1.0 / cell.negative.interfacial_area(),
            i_scale_pos: 1.0 / cell.positive.interfacial_area(),
        }
    }

    fn overpotential(&self, i_local: f64, params: &ElectrodeParameters, c_e: f64, cs: f64) -> f64 {
        let i0 = exchange_current(params.k_rxn, c_e, cs, params.c_s_max);
        self.thermal * (i_local / (2.0 * i0)).asinh()
    }

    fn voltage(
        &self,
        cell: &CellParameters,
        current: f64,
        neg: &Particle,
        j_neg: f64,
        pos: &Particle,
        j_pos: f64,
    ) -> Result<f64> {
        let cs_n = neg.surface(j_neg);
        let cs_p = pos.surface(j_pos);
        for (tag, cs, cmax) in [
            (Electrode::Negative, cs_n, cell.negative.c_s_max),
            (Electrode::Positive, cs_p, cell.positive.c_s_max),
        ] {
            if !(cs > 0.0 && cs < cmax) {
                return Err(Error::Saturation {
                    electrode: tag,
                    c_surf: cs,
                });
            }
        }
        let u_n = cell
            .ocp_negative
            .lookup(cs_n / cell.negative.c_s_max)
            .potential;
        let u_p = cell
            .ocp_positive
            .lookup(cs_p / cell.positive.c_s_max)
            .potential;
        // Anodic current density is positive; on discharge the negative
        // electrode is the anode.
        let eta_n = self.overpotential(
            current * self.i_scale_neg,
            &cell.negative,
            cell.c_electrolyte,
            cs_n,
        );
        let eta_p = self.overpotential(
            -current * self.i_scale_pos,
            &cell.positive,
            cell.c_electrolyte,
            cs_p,
        );
        Ok(u_p - u_n + eta_p - eta_n - current * cell.r_ohmic)
    }
}

/// Finite-volume sphere. Geometric factors drop the common 4*pi.
struct Particle {
    d_s: f64,
    c_max: f64,
    dr: f64,
    conc: Vec<f64>,
    inv_volume: Vec<f64>,
    /// Outer face area of each shell; the last entry is the particle surface.
    face: Vec<f64>,
    /// Face area times D / dr for the interior faces.
    conductance: Vec<f64>,
    flux: Vec<f64>,
    dt_stable: f64,
}

impl Particle {
    fn new(params: &ElectrodeParameters, shells: usize, theta: f64) -> Self {
        let dr = params.particle_radius / shells as f64;
        let volume: Vec<f64> = (0..shells)
            .map(|i| {
                let (a, b) = (i as f64, (i + 1) as f64);
                (b * b * b - a * a * a) * dr * dr * dr / 3.0
            })
            .collect();
        let face: Vec<f64> = (0..shells).map(|i| ((i + 1) as f64 * dr).powi(2)).collect();
        let conductance: Vec<f64> = face[..shells - 1]
            .iter()
            .map(|a| params.d_s * a / dr)
            .collect();
        let dt_stable = (0..shells)
            .map(|i| {
                let inner = if i == 0 { 0.0 } else { conductance[i - 1] };
                let outer = if i + 1 < shells { conductance[i] } else { 0.0 };
                volume[i] / (inner + outer)
            })
            .fold(f64::INFINITY, f64::min)
            * STABILITY_SAFETY;
        Self {
            d_s: params.d_s,
            c_max: params.c_s_max,
            dr,
            conc: vec![theta * params.c_s_max; shells],
            inv_volume: volume.iter().map(|v| 1.0 / v).collect(),
            face,
            conductance,
            flux: vec![0.0; shells - 1],
            dt_stable,
        }
    }

    /// One explicit Euler step with outward surface flux `j_out`, mol/(m^2 s).
    fn advance(&mut self, h: f64, j_out: f64) {
        let n = self.conc.len();
        for i in 0..n - 1 {
            self.flux[i] = self.conductance[i] * (self.conc[i + 1] - self.conc[i]);
        }
        let surface_out = j_out * self.face[n - 1];
        for i in 0..n {
            let inflow = if i + 1 < n {
                self.flux[i]
            } else {
                -surface_out
            };
            let outflow = if i > 0 { self.flux[i - 1] } else { 0.0 };
            self.conc[i] += h * self.inv_volume[i] * (inflow - outflow);
        }
    }

    /// Surface concentration extrapolated from the outer shell with the
    /// boundary gradient `-j / D`.
    fn surface(&self, j_out: f64) -> f64 {
        self.conc[self.conc.len() - 1] - j_out * 0.5 * self.dr / self.d_s
    }

    fn mean_concentration(&self) -> f64 {
        let (mut total, mut vol) = (0.0, 0.0);
        for (c, iv) in self.conc.iter().zip(&self.inv_volume) {
            total += c / iv;
            vol += 1.0 / iv;
        }
        total / vol
    }

    fn mean_stoichiometry(&self) -> f64 {
        self.mean_concentration() / self.c_max
    }

    /// Lithium held by the electrode's whole particle population, mol.
    fn moles(&self, params: &ElectrodeParameters) -> f64 {
        self.mean_concentration() * params.epsilon * params.volume()
    }
}
