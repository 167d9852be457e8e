//! Mapping between degradation modes and the parameters that carry them.
//!
//! Loss of lithium inventory lowers the negative electrode's initial
//! stoichiometry (and with it `c_n0`); loss of active material scales the
//! volume fraction of the affected electrode. Both injectors are pure.

use serde::{Deserialize, Serialize};

use crate::constants::{FARADAY, SECONDS_PER_HOUR};
use crate::error::{Error, Result};
use crate::model::{CellParameters, Electrode, ElectrodeParameters};

/// Magnitudes of the three degradation modes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MechanismMagnitudes {
    /// Lithium inventory loss in negative-electrode stoichiometry units.
    pub x_lli: f64,
    /// Fractional loss of the negative volume fraction.
    pub lam_ne: f64,
    /// Fractional loss of the positive volume fraction.
    pub lam_pe: f64,
}

impl MechanismMagnitudes {
    pub fn lam(&self, electrode: Electrode) -> f64 {
        match electrode {
            Electrode::Negative => self.lam_ne,
            Electrode::Positive => self.lam_pe,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_lli.is_finite() && self.x_lli >= 0.0) {
            return Err(Error::Domain(format!(
                "x_lli must be >= 0, got {}",
                self.x_lli
            )));
        }
        for (name, v) in [("lam_ne", self.lam_ne), ("lam_pe", self.lam_pe)] {
            check_loss_fraction(name, v)?;
        }
        Ok(())
    }
}

fn check_loss_fraction(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && (0.0..1.0).contains(&v)) {
        return Err(Error::Domain(format!("{name} must lie in [0, 1), got {v}")));
    }
    Ok(())
}

/// The three aging-coupled model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgingParameter {
    #[serde(rename = "c_n0")]
    Cn0,
    #[serde(rename = "eps_n")]
    EpsN,
    #[serde(rename = "eps_p")]
    EpsP,
}

impl AgingParameter {
    pub const ALL: [AgingParameter; 3] = [
        AgingParameter::Cn0,
        AgingParameter::EpsN,
        AgingParameter::EpsP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgingParameter::Cn0 => "c_n0",
            AgingParameter::EpsN => "eps_n",
            AgingParameter::EpsP => "eps_p",
        }
    }

    pub fn value(self, cell: &CellParameters) -> f64 {
        match self {
            AgingParameter::Cn0 => cell.negative.c_0,
            AgingParameter::EpsN => cell.negative.epsilon,
            AgingParameter::EpsP => cell.positive.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterDelta {
    pub parameter_name: AgingParameter,
    pub bol_value: f64,
    pub aged_value: f64,
    pub relative_change: f64,
}

impl ParameterDelta {
    pub fn new(parameter_name: AgingParameter, bol_value: f64, aged_value: f64) -> Self {
        Self {
            parameter_name,
            bol_value,
            aged_value,
            relative_change: (aged_value - bol_value) / bol_value,
        }
    }
}

/// Theoretical capacity of the electrode's lithiation window, Ah.
pub fn electrode_capacity(electrode: &ElectrodeParameters) -> f64 {
    (electrode.theta_0 - electrode.theta_f)
        * electrode.epsilon
        * electrode.volume()
        * electrode.c_s_max
        * FARADAY
        / SECONDS_PER_HOUR
}

/// Capacity of the window after lithium loss and active-material loss, Ah.
pub fn aged_capacity(
    electrode: &ElectrodeParameters,
    which: Electrode,
    mags: &MechanismMagnitudes,
) -> Result<f64> {
    mags.validate()?;
    let window = electrode.theta_0 - electrode.theta_f;
    if mags.x_lli >= window {
        return Err(Error::DegenerateWindow {
            x_lli: mags.x_lli,
            window,
        });
    }
    let eps_hat = electrode.epsilon * (1.0 - mags.lam(which));
    Ok(
        (window - mags.x_lli) * eps_hat * electrode.volume() * electrode.c_s_max * FARADAY
            / SECONDS_PER_HOUR,
    )
}

/// Usable cell capacity: the smaller of the two electrode windows, Ah.
pub fn cell_capacity(cell: &CellParameters) -> f64 {
    electrode_capacity(&cell.negative).min(electrode_capacity(&cell.positive))
}

/// The electrode whose window is exhausted first.
pub fn limiting_electrode(cell: &CellParameters) -> Electrode {
    if electrode_capacity(&cell.negative) <= electrode_capacity(&cell.positive) {
        Electrode::Negative
    } else {
        Electrode::Positive
    }
}

pub fn cn0_from_theta0(theta_0_n: f64, c_s_max_n: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta_0_n) {
        return Err(Error::Domain(format!(
            "theta_0 must lie in [0, 1], got {theta_0_n}"
        )));
    }
    if !(c_s_max_n.is_finite() && c_s_max_n > 0.0) {
        return Err(Error::Domain(format!(
            "c_s_max must be > 0, got {c_s_max_n}"
        )));
    }
    Ok(c_s_max_n * theta_0_n)
}

pub fn theta0_from_cn0(c_n0: f64, c_s_max_n: f64) -> Result<f64> {
    if !(c_s_max_n.is_finite() && c_s_max_n > 0.0) {
        return Err(Error::Domain(format!(
            "c_s_max must be > 0, got {c_s_max_n}"
        )));
    }
    if !(c_n0.is_finite() && c_n0 >= 0.0 && c_n0 <= c_s_max_n) {
        return Err(Error::Domain(format!(
            "c_n0 = {c_n0} outside [0, c_s_max = {c_s_max_n}]"
        )));
    }
    Ok(c_n0 / c_s_max_n)
}

/// Removes `x_lli` of cyclable lithium from the negative electrode.
pub fn apply_lli(cell: &CellParameters, x_lli: f64) -> Result<CellParameters> {
    if !(x_lli.is_finite() && x_lli >= 0.0) {
        return Err(Error::Domain(format!("x_lli must be >= 0, got {x_lli}")));
    }
    let neg = &cell.negative;
    let window = neg.theta_0 - neg.theta_f;
    if x_lli >= window {
        return Err(Error::DegenerateWindow { x_lli, window });
    }
    let mut aged = cell.clone();
    if x_lli > 0.0 {
        let theta_0 = neg.theta_0 - x_lli;
        aged.negative.theta_0 = theta_0;
        aged.negative.c_0 = cn0_from_theta0(theta_0, neg.c_s_max)?;
    }
    Ok(aged)
}

/// Sets the negative initial concentration directly; the lithium-loss
/// equivalent of `apply_lli` used when searching over `c_n0`.
pub fn apply_cn0(cell: &CellParameters, c_n0: f64) -> Result<CellParameters> {
    let neg = &cell.negative;
    let theta_0 = theta0_from_cn0(c_n0, neg.c_s_max)?;
    if theta_0 <= neg.theta_f {
        return Err(Error::DegenerateWindow {
            x_lli: neg.theta_0 - theta_0,
            window: neg.theta_0 - neg.theta_f,
        });
    }
    let mut aged = cell.clone();
    aged.negative.theta_0 = theta_0;
    aged.negative.c_0 = c_n0;
    Ok(aged)
}

/// Scales the volume fraction of one electrode by `1 - loss_fraction`.
pub fn apply_lam(
    cell: &CellParameters,
    electrode: Electrode,
    loss_fraction: f64,
) -> Result<CellParameters> {
    check_loss_fraction("loss_fraction", loss_fraction)?;
    let mut aged = cell.clone();
    if loss_fraction > 0.0 {
        aged.electrode_mut(electrode).epsilon *= 1.0 - loss_fraction;
    }
    Ok(aged)
}

/// Sets a volume fraction directly.
pub fn apply_epsilon(
    cell: &CellParameters,
    electrode: Electrode,
    epsilon: f64,
) -> Result<CellParameters> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let mut aged = cell.clone();
    aged.electrode_mut(electrode).epsilon = epsilon;
    Ok(aged)
}

/// Applies all three modes; order is irrelevant because they touch disjoint fields.
pub fn apply_mechanisms(
    cell: &CellParameters,
    mags: &MechanismMagnitudes,
) -> Result<CellParameters> {
    mags.validate()?;
    let aged = apply_lli(cell, mags.x_lli)?;
    let aged = apply_lam(&aged, Electrode::Negative, mags.lam_ne)?;
    apply_lam(&aged, Electrode::Positive, mags.lam_pe)
}

/// Builds a cell with the three aging parameters replaced.
pub fn with_aging_parameters(
    cell: &CellParameters,
    c_n0: f64,
    eps_n: f64,
    eps_p: f64,
) -> Result<CellParameters> {
    let aged = apply_cn0(cell, c_n0)?;
    let aged = apply_epsilon(&aged, Electrode::Negative, eps_n)?;
    apply_epsilon(&aged, Electrode::Positive, eps_p)
}

/// Magnitudes that turn `bol` into a cell with the given aging parameters.
pub fn magnitudes_between(
    bol: &CellParameters,
    c_n0: f64,
    eps_n: f64,
    eps_p: f64,
) -> MechanismMagnitudes {
    MechanismMagnitudes {
        x_lli: (bol.negative.c_0 - c_n0) / bol.negative.c_s_max,
        lam_ne: 1.0 - eps_n / bol.negative.epsilon,
        lam_pe: 1.0 - eps_p / bol.positive.epsilon,
    }
}

pub fn degradation_deltas(bol: &CellParameters, aged: &CellParameters) -> Vec<ParameterDelta> {
    AgingParameter::ALL
        .iter()
        .map(|&p| ParameterDelta::new(p, p.value(bol), p.value(aged)))
        .collect()
}
