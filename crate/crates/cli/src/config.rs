//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfrac::analysis::{ErrorMode, NormOptions, SeminormWeight};
use tempfrac::basis::coarsest_level;
use tempfrac::linsolve::{Method, DEFAULT_TOL};
use tempfrac::problems::ProblemSpec;
use tempfrac::OperatorParams;

use crate::error::CliError;

/// Largest level accepted from a config.
pub const MAX_LEVEL: u32 = 20;

/// Registered problem id or an inline specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Id(String),
    Inline(ProblemSpec),
}

/// Frequency grid for the symbol dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(default = "default_true")]
    pub log: bool,
}

fn default_true() -> bool {
    true
}

impl Default for XiGrid {
    fn default() -> Self {
        Self { lo: 1e-6, hi: 1e6, count: 241, log: true }
    }
}

impl XiGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let s = k as f64 / last;
                if self.log {
                    (self.lo.ln() + s * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + s * (self.hi - self.lo)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Defaults to the first experiment when absent.
    #[serde(default)]
    pub problem: Option<ProblemRef>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(default)]
    pub n_range: Vec<u32>,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Output file stem; defaults to the command name.
    #[serde(default)]
    pub name: Option<String>,
    /// Forces exact or successive-level errors in `convergence`.
    #[serde(default)]
    pub mode: Option<ErrorMode>,
    #[serde(default)]
    pub norm_weight: Option<SeminormWeight>,
    #[serde(default)]
    pub xi: Option<XiGrid>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

fn default_r() -> usize {
    2
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))
    }

    /// Operator parameters and problem, with the problem's own parameters
    /// taking precedence for inline specifications.
    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        match &self.problem {
            Some(ProblemRef::Inline(spec)) => {
                if self.beta.is_some() || self.lambda.is_some() {
                    return Err(CliError::Config(
                        "beta/lambda must not be given alongside an inline problem".into(),
                    ));
                }
                spec.validate()?;
                Ok(spec.clone())
            }
            Some(ProblemRef::Id(id)) => Ok(ProblemSpec::named(id, self.params()?)?),
            None => Ok(ProblemSpec::named("example1", self.params()?)?),
        }
    }

    pub fn params(&self) -> Result<OperatorParams, CliError> {
        if let Some(ProblemRef::Inline(spec)) = &self.problem {
            return Ok(spec.params);
        }
        let beta = self.beta.ok_or_else(|| CliError::Config("missing beta".into()))?;
        Ok(OperatorParams::new(beta, self.lambda.unwrap_or(0.0))?)
    }

    pub fn method(&self) -> Method {
        self.method.unwrap_or(Method::Pcg)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn norm_options(&self) -> NormOptions {
        let mut opts = NormOptions::default();
        if let Some(w) = self.norm_weight {
            opts.weight = w;
        }
        opts
    }

    /// Checks shared by every level-based command.
    pub fn validate_levels(&self) -> Result<(), CliError> {
        if self.r != 1 && self.r != 2 {
            return Err(CliError::Config(format!("r must be 1 or 2, got {}", self.r)));
        }
        let params = self.params()?;
        if self.r == 1 && params.beta >= 1.0 {
            return Err(CliError::Config(format!(
                "r = 1 (piecewise constants) requires beta < 1, got {}",
                params.beta
            )));
        }
        if self.n_range.is_empty() {
            return Err(CliError::Config("n_range must not be empty".into()));
        }
        if self.n_range.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("n_range must be strictly ascending".into()));
        }
        let n0 = coarsest_level(self.r);
        if let Some(bad) = self.n_range.iter().find(|n| **n < n0 || **n > MAX_LEVEL) {
            return Err(CliError::Config(format!("level {bad} outside [{n0}, {MAX_LEVEL}] for r = {}", self.r)));
        }
        let tol = self.tol();
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::Config(format!("tol must lie in (0, 1), got {tol}")));
        }
        Ok(())
    }
}
