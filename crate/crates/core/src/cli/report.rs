//! JSON run reports.

use serde::Serialize;

use crate::conditions::ConditionsReport;
use crate::gevrey::{DerivativeNorm, EkReport, Envelope, GevreyEstimate, OmegaSequence, ProbeReport};
use crate::picard::SolveSummary;
use crate::problem::ValidationReport;

use super::input::ProblemFile;

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ek: Option<EkReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Envelope>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaSequence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivative_norms: Option<Vec<DerivativeNorm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gevrey: Option<GevreyEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.ek.is_none()
            && self.envelope.is_none()
            && self.omega.is_none()
            && self.lambda0.is_none()
            && self.probe.is_none()
            && self.derivative_norms.is_none()
            && self.gevrey.is_none()
            && self.errors.is_empty()
    }
}

/// Wall-clock seconds per phase; only emitted on request so that reports
/// stay byte-stable by default.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub check_s: f64,
    pub solve_s: f64,
    pub diagnostics_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub problem: ProblemFile,
    pub validation: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn new(problem: ProblemFile, validation: ValidationReport) -> RunReport {
        RunReport {
            problem,
            validation,
            conditions: None,
            solve: None,
            diagnostics: None,
            timing: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
