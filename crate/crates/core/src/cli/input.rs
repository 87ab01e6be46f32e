//! JSON problem files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Problem, SolverSettings};

pub const EXAMPLE1: &str = include_str!("../../problems/example1.json");
pub const EXAMPLE2: &str = include_str!("../../problems/example2.json");
pub const ODE_ORACLE: &str = include_str!("../../problems/ode_oracle.json");
pub const MANUFACTURED: &str = include_str!("../../problems/manufactured.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cheb_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub k: f64,
    pub d: f64,
    pub c: f64,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    pub a: String,
    pub b: String,
    pub psi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverFile>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<ProblemFile> {
        serde_json::from_str(text).map_err(|e| Error::InvalidProblem(format!("problem file: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<ProblemFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidProblem(format!("cannot read {}: {e}", path.display())))?;
        ProblemFile::from_json(&text)
    }

    pub fn to_problem(&self) -> Result<Problem> {
        if self.p.is_empty() {
            return Err(Error::InvalidProblem("\"P\" must be a non-empty array".into()));
        }
        let mut settings = SolverSettings::default();
        if let Some(s) = &self.solver {
            if let Some(v) = s.tol {
                settings.solve_tol = v;
            }
            if let Some(v) = s.max_iter {
                settings.max_iter = v;
            }
            if let Some(v) = s.cheb_tol {
                settings.cheb_tol = v;
            }
            if let Some(v) = s.max_degree {
                settings.max_degree = v;
            }
        }
        let mut problem = Problem::from_strs(&self.a, &self.b, &self.psi, self.p.clone(), self.k, self.d, self.c)?
            .with_settings(settings);
        problem.mu = self.mu;
        Ok(problem)
    }
}

impl From<&Problem> for ProblemFile {
    fn from(p: &Problem) -> ProblemFile {
        let defaults = SolverSettings::default();
        let s = p.settings;
        let solver = (s != defaults).then_some(SolverFile {
            tol: Some(s.solve_tol),
            max_iter: Some(s.max_iter),
            cheb_tol: Some(s.cheb_tol),
            max_degree: Some(s.max_degree),
        });
        ProblemFile {
            k: p.k,
            d: p.d,
            c: p.c,
            p: p.poly.coeffs().to_vec(),
            a: p.a.to_string(),
            b: p.b.to_string(),
            psi: p.psi.to_string(),
            mu: p.mu,
            solver,
        }
    }
}

/// Built-in instance by name: `example1`, `example2`, `ode_oracle`,
/// `manufactured`.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "example1" => Some(EXAMPLE1),
        "example2" => Some(EXAMPLE2),
        "ode_oracle" => Some(ODE_ORACLE),
        "manufactured" => Some(MANUFACTURED),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        for name in ["example1", "example2", "ode_oracle", "manufactured"] {
            let file = ProblemFile::from_json(builtin(name).unwrap()).unwrap();
            let p = file.to_problem().unwrap();
            assert!(p.validate().passed(), "{name}");
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = r#"{"k":1,"d":0,"c":0,"P":[1],"a":"1","b":"0","psi":"t","extra":1}"#;
        let err = ProblemFile::from_json(text).unwrap_err();
        assert!(err.to_string().contains("extra"));
    }

    #[test]
    fn missing_key_and_empty_array_rejected() {
        assert!(ProblemFile::from_json(r#"{"k":1,"d":0,"c":0,"P":[1],"a":"1","b":"0"}"#).is_err());
        let file = ProblemFile::from_json(r#"{"k":1,"d":0,"c":0,"P":[],"a":"1","b":"0","psi":"t"}"#).unwrap();
        assert!(file.to_problem().is_err());
    }

    #[test]
    fn solver_overrides_apply() {
        let text = r#"{"k":1,"d":0,"c":0,"P":[0,0,1],"a":"1","b":"0","psi":"t","solver":{"tol":1e-10,"max_iter":7}}"#;
        let p = ProblemFile::from_json(text).unwrap().to_problem().unwrap();
        assert_eq!(p.settings.solve_tol, 1e-10);
        assert_eq!(p.settings.max_iter, 7);
        let echo = ProblemFile::from(&p);
        assert_eq!(echo.solver.unwrap().max_iter, Some(7));
    }

    #[test]
    fn comma_decimal_rejected() {
        let text = r#"{"k":1,"d":0,"c":0,"P":[1],"a":"0,5","b":"0","psi":"t"}"#;
        let file = ProblemFile::from_json(text).unwrap();
        assert!(matches!(file.to_problem(), Err(Error::Parse(_))));
    }
}
