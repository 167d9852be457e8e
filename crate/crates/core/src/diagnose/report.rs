use serde::{Deserialize, Serialize};

use super::classify::MechanismFlags;
use super::estimate::StageTrace;
use crate::degradation::{AgingParameter, ParameterDelta};
use crate::format::round_sig;
use crate::ica::FeatureDelta;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedParameters {
    /// mol/m^3
    pub c_n0: f64,
    pub eps_n: f64,
    pub eps_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegradationReport {
    pub schema_version: u32,
    pub flags: MechanismFlags,
    pub estimated: EstimatedParameters,
    pub deltas: Vec<ParameterDelta>,
    /// RMS voltage error of the final fit, V.
    pub fit_rms: f64,
    /// Simulated minus measured valley position after the final fit, V.
    pub valley_residual: Option<f64>,
    /// Ah
    pub capacity_measured: f64,
    /// Ah
    pub capacity_simulated: f64,
    pub capacity_matched: bool,
    /// Measured features relative to the simulated fresh cell.
    pub feature_delta: FeatureDelta,
    pub stages_run: Vec<AgingParameter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_trace: Option<Vec<StageTrace>>,
    /// Set when a stage failed and the estimates stop at the last good stage.
    pub incomplete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl DegradationReport {
    /// Rounds every number to the export precision so that a saved report
    /// reloads identical to the in-memory one.
    pub fn quantized(mut self) -> Self {
        let q = round_sig;
        self.estimated = EstimatedParameters {
            c_n0: q(self.estimated.c_n0),
            eps_n: q(self.estimated.eps_n),
            eps_p: q(self.estimated.eps_p),
        };
        for d in &mut self.deltas {
            d.bol_value = q(d.bol_value);
            d.aged_value = q(d.aged_value);
            d.relative_change = q(d.relative_change);
        }
        self.fit_rms = q(self.fit_rms);
        self.valley_residual = self.valley_residual.map(q);
        self.capacity_measured = q(self.capacity_measured);
        self.capacity_simulated = q(self.capacity_simulated);
        for c in [
            &mut self.feature_delta.low_voltage_peak,
            &mut self.feature_delta.high_voltage_valley,
        ] {
            c.shift = q(c.shift);
            c.ratio = q(c.ratio);
        }
        if let Some(stages) = &mut self.search_trace {
            for s in stages {
                for p in &mut s.points {
                    p.value = q(p.value);
                    p.loss = q(p.loss);
                    p.capacity = q(p.capacity);
                }
            }
        }
        self
    }

    pub fn without_trace(mut self) -> Self {
        self.search_trace = None;
        self
    }

    /// Plain-text summary for terminals.
    pub fn summary(&self) -> String {
        let yes = |b: bool| if b { "present" } else { "absent" };
        let mut s = String::new();
        s.push_str(&format!("schema version      {}\n", self.schema_version));
        if self.incomplete {
            s.push_str(&format!(
                "status              INCOMPLETE: {}\n",
                self.failure.as_deref().unwrap_or("unknown failure")
            ));
        }
        s.push_str("mechanisms\n");
        for (name, flag, ev) in [
            ("LLI", self.flags.lli, &self.flags.evidence.lli),
            ("LAM_NE", self.flags.lam_ne, &self.flags.evidence.lam_ne),
            ("LAM_PE", self.flags.lam_pe, &self.flags.evidence.lam_pe),
        ] {
            s.push_str(&format!("  {name:<8} {}\n", yes(flag)));
            if let Some(e) = ev {
                s.push_str(&format!("           {e}\n"));
            }
        }
        s.push_str("parameters          BOL            estimate       change\n");
        for d in &self.deltas {
            s.push_str(&format!(
                "  {:<8}          {:<14} {:<14} {:+.2}%\n",
                d.parameter_name.name(),
                format!("{}", d.bol_value),
                format!("{}", d.aged_value),
                d.relative_change * 100.0
            ));
        }
        s.push_str(&format!(
            "capacity            measured {:.4} Ah, simulated {:.4} Ah{}\n",
            self.capacity_measured,
            self.capacity_simulated,
            if self.capacity_matched {
                ""
            } else {
                " (outside tolerance)"
            }
        ));
        s.push_str(&format!(
            "fit RMS             {:.3} mV\n",
            self.fit_rms * 1e3
        ));
        match self.valley_residual {
            Some(r) => s.push_str(&format!("valley residual     {:+.3} mV\n", r * 1e3)),
            None => s.push_str("valley residual     n/a (no valley in the fitted curve)\n"),
        }
        let stages: Vec<&str> = self.stages_run.iter().map(|p| p.name()).collect();
        s.push_str(&format!(
            "stages run          {}\n",
            if stages.is_empty() {
                "none".to_string()
            } else {
                stages.join(", ")
            }
        ));
        s
    }
}
