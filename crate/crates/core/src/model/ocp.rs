use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which electrode a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Electrode {
    Negative,
    Positive,
}

impl std::fmt::Display for Electrode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Electrode::Negative => "negative",
            Electrode::Positive => "positive",
        })
    }
}

/// Tabulated open-circuit potential (V vs Li/Li+) against stoichiometry.
///
/// Both electrodes delithiate towards higher potential, so the potential column
/// must be non-increasing in stoichiometry for either tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcpTable {
    stoichiometry_grid: Vec<f64>,
    potential: Vec<f64>,
    electrode_tag: Electrode,
}

/// Result of an OCP lookup. `clamped` is set when the query fell outside the
/// tabulated span and the endpoint value was returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcpValue {
    pub potential: f64,
    pub clamped: bool,
}

impl OcpTable {
    pub fn new(
        stoichiometry_grid: Vec<f64>,
        potential: Vec<f64>,
        electrode_tag: Electrode,
    ) -> Result<Self> {
        let table = Self {
            stoichiometry_grid,
            potential,
            electrode_tag,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let (x, u) = (&self.stoichiometry_grid, &self.potential);
        if x.len() < 2 {
            return Err(Error::InvalidTable(format!(
                "{} electrode table needs at least 2 points, got {}",
                self.electrode_tag,
                x.len()
            )));
        }
        if x.len() != u.len() {
            return Err(Error::InvalidTable(format!(
                "grid has {} points but potential has {}",
                x.len(),
                u.len()
            )));
        }
        if x.iter().chain(u).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite entry".into()));
        }
        if x[0] < 0.0 || x[x.len() - 1] > 1.0 {
            return Err(Error::InvalidTable(format!(
                "stoichiometry grid [{}, {}] exceeds [0, 1]",
                x[0],
                x[x.len() - 1]
            )));
        }
        if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable(format!(
                "stoichiometry grid not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(i) = u.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidTable(format!(
                "{} electrode potential increases with stoichiometry at index {}",
                self.electrode_tag,
                i + 1
            )));
        }
        Ok(())
    }

    pub fn electrode(&self) -> Electrode {
        self.electrode_tag
    }

    pub fn stoichiometry(&self) -> &[f64] {
        &self.stoichiometry_grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Piecewise-linear lookup, exact at the nodes, clamped outside the grid.
    pub fn eval(&self, theta: f64) -> Result<OcpValue> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!(
                "stoichiometry {theta} outside [0, 1] for the {} electrode OCP",
                self.electrode_tag
            )));
        }
        Ok(self.lookup(theta))
    }

    pub(crate) fn lookup(&self, theta: f64) -> OcpValue {
        let x = &self.stoichiometry_grid;
        let u = &self.potential;
        let n = x.len();
        if theta <= x[0] {
            return OcpValue {
                potential: u[0],
                clamped: theta < x[0],
            };
        }
        if theta >= x[n - 1] {
            return OcpValue {
                potential: u[n - 1],
                clamped: theta > x[n - 1],
            };
        }
        // first node strictly greater than theta; 1 <= hi <= n - 1
        let hi = x.partition_point(|&xi| xi <= theta);
        let lo = hi - 1;
        if x[lo] == theta {
            return OcpValue {
                potential: u[lo],
                clamped: false,
            };
        }
        let w = (theta - x[lo]) / (x[hi] - x[lo]);
        OcpValue {
            potential: u[lo] + w * (u[hi] - u[lo]),
            clamped: false,
        }
    }
}

/// Free-function form of [`OcpTable::eval`] returning only the potential.
pub fn ocp_eval(table: &OcpTable, theta: f64) -> Result<f64> {
    table.eval(theta).map(|v| v.potential)
}
