use serde::{Deserialize, Serialize};

use super::ocp::{Electrode, OcpTable};
use crate::error::{Error, Result};

/// Relative tolerance on `c_0 = c_s_max * theta_0` for the negative electrode.
const CN0_CONSISTENCY_RTOL: f64 = 1e-6;

/// Geometric, transport and stoichiometric parameters of one electrode.
///
/// `theta_0` and `theta_f` bound the electrode's usable lithiation window with
/// `theta_0` at the lithiated end. For the negative electrode `theta_0` is the
/// stoichiometry of the charged cell, so `c_0 = c_s_max * theta_0`. For the
/// positive electrode `c_0` is the charged-state concentration and the window
/// spans the lithiation the electrode can accept before it would limit the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeParameters {
    /// Active-material volume fraction.
    pub epsilon: f64,
    /// m
    pub thickness: f64,
    /// m^2
    pub area: f64,
    /// m
    pub particle_radius: f64,
    /// mol/m^3
    pub c_s_max: f64,
    /// Initial (charged-state) lithium concentration, mol/m^3.
    pub c_0: f64,
    /// Solid-phase diffusivity, m^2/s.
    pub d_s: f64,
    /// Butler-Volmer rate constant, m^2.5 mol^-0.5 s^-1.
    pub k_rxn: f64,
    pub theta_0: f64,
    pub theta_f: f64,
}

impl ElectrodeParameters {
    /// Electrode volume `area * thickness`, m^3.
    pub fn volume(&self) -> f64 {
        self.area * self.thickness
    }

    /// Specific interfacial area `3 epsilon / R`, 1/m.
    pub fn specific_area(&self) -> f64 {
        3.0 * self.epsilon / self.particle_radius
    }

    /// Total particle surface in the electrode, m^2.
    pub fn interfacial_area(&self) -> f64 {
        self.specific_area() * self.volume()
    }

    pub fn initial_stoichiometry(&self) -> f64 {
        self.c_0 / self.c_s_max
    }

    pub fn validate(&self, tag: Electrode) -> Result<()> {
        let field = |name: &str| format!("{tag}.{name}");
        let positive = [
            ("thickness", self.thickness),
            ("area", self.area),
            ("particle_radius", self.particle_radius),
            ("c_s_max", self.c_s_max),
            ("d_s", self.d_s),
            ("k_rxn", self.k_rxn),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    field(name),
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(
                field("epsilon"),
                format!("must lie in (0, 1), got {}", self.epsilon),
            ));
        }
        if !(0.0 <= self.theta_f && self.theta_f < self.theta_0 && self.theta_0 <= 1.0) {
            return Err(Error::param(
                field("theta_0"),
                format!(
                    "window requires 0 <= theta_f < theta_0 <= 1, got theta_f = {}, theta_0 = {}",
                    self.theta_f, self.theta_0
                ),
            ));
        }
        if !(self.c_0 > 0.0 && self.c_0 <= self.c_s_max) {
            return Err(Error::param(
                field("c_0"),
                format!(
                    "must lie in (0, c_s_max = {}], got {}",
                    self.c_s_max, self.c_0
                ),
            ));
        }
        if tag == Electrode::Negative {
            let expected = self.c_s_max * self.theta_0;
            if ((self.c_0 - expected) / expected).abs() > CN0_CONSISTENCY_RTOL {
                return Err(Error::param(
                    field("c_0"),
                    format!(
                        "must equal c_s_max * theta_0 = {expected}, got {}",
                        self.c_0
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Full parameter set of a two-electrode cell. Discharge current is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CellParameters {
    pub negative: ElectrodeParameters,
    pub positive: ElectrodeParameters,
    pub ocp_negative: OcpTable,
    pub ocp_positive: OcpTable,
    /// Lumped ohmic, film and electrolyte resistance, ohm.
    pub r_ohmic: f64,
    /// Electrolyte concentration, held fixed, mol/m^3.
    pub c_electrolyte: f64,
    /// K
    pub temperature: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Ah; the C-rate reference.
    pub nominal_capacity: f64,
}

impl CellParameters {
    pub fn electrode(&self, which: Electrode) -> &ElectrodeParameters {
        match which {
            Electrode::Negative => &self.negative,
            Electrode::Positive => &self.positive,
        }
    }

    pub fn electrode_mut(&mut self, which: Electrode) -> &mut ElectrodeParameters {
        match which {
            Electrode::Negative => &mut self.negative,
            Electrode::Positive => &mut self.positive,
        }
    }

    pub fn ocp(&self, which: Electrode) -> &OcpTable {
        match which {
            Electrode::Negative => &self.ocp_negative,
            Electrode::Positive => &self.ocp_positive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.negative.validate(Electrode::Negative)?;
        self.positive.validate(Electrode::Positive)?;
        for (tag, table) in [
            (Electrode::Negative, &self.ocp_negative),
            (Electrode::Positive, &self.ocp_positive),
        ] {
            table.validate()?;
            if table.electrode() != tag {
                return Err(Error::InvalidTable(format!(
                    "table tagged {} supplied for the {tag} electrode",
                    table.electrode()
                )));
            }
        }
        if !(self.v_min.is_finite() && self.v_max.is_finite() && self.v_min < self.v_max) {
            return Err(Error::param(
                "v_min",
                format!("need v_min < v_max, got {} and {}", self.v_min, self.v_max),
            ));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::param("temperature", "must be > 0 K"));
        }
        if !(self.r_ohmic.is_finite() && self.r_ohmic >= 0.0) {
            return Err(Error::param("r_ohmic", "must be >= 0"));
        }
        if !(self.c_electrolyte.is_finite() && self.c_electrolyte > 0.0) {
            return Err(Error::param("c_electrolyte", "must be > 0"));
        }
        if !(self.nominal_capacity.is_finite() && self.nominal_capacity > 0.0) {
            return Err(Error::param("nominal_capacity", "must be > 0"));
        }
        Ok(())
    }

    /// Open-circuit voltage at the given bulk stoichiometries.
    pub fn ocv(&self, theta_n: f64, theta_p: f64) -> Result<f64> {
        Ok(self.ocp_positive.eval(theta_p)?.potential - self.ocp_negative.eval(theta_n)?.potential)
    }
}
