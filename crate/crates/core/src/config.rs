//! Run configuration, read from TOML. Every field has a default, so an empty
//! file is a valid configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::certify::VerifyOptions;
use crate::error::{Error, Result};
use crate::groundstate::GroundStateOptions;
use crate::radialode::Operator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorSelection {
    Lplus,
    Lminus,
    Both,
}

impl OperatorSelection {
    pub fn operators(self) -> Vec<Operator> {
        match self {
            OperatorSelection::Lplus => vec![Operator::Lplus],
            OperatorSelection::Lminus => vec![Operator::Lminus],
            OperatorSelection::Both => vec![Operator::Lplus, Operator::Lminus],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorSelection::Lplus => "lplus",
            OperatorSelection::Lminus => "lminus",
            OperatorSelection::Both => "both",
        }
    }
}

impl fmt::Display for OperatorSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lplus" => Ok(Self::Lplus),
            "lminus" => Ok(Self::Lminus),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!("unknown operator selection '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub profile: PathBuf,
    pub report: PathBuf,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self { profile: PathBuf::from("profile.json"), report: PathBuf::from("report.json") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorSelection,
    /// Width below which bisection on the central height stops.
    pub bisection_tol: f64,
    pub groundstate: GroundStateOptions,
    pub verify: VerifyOptions,
    pub output: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            operator: OperatorSelection::Both,
            bisection_tol: 1e-10,
            groundstate: GroundStateOptions::default(),
            verify: VerifyOptions::default(),
            output: OutputPaths::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        positive("bisection_tol", self.bisection_tol)?;
        let g = &self.groundstate;
        positive("groundstate.integrator_tol", g.integrator_tol)?;
        positive("groundstate.shoot_tol", g.shoot_tol)?;
        positive("groundstate.r_start", g.r_start)?;
        positive("groundstate.inner_step", g.inner_step)?;
        positive("groundstate.outer_step", g.outer_step)?;
        positive("groundstate.tail_window", g.tail_window)?;
        if !(g.bracket.0 > 0.0 && g.bracket.1 > g.bracket.0) {
            return Err(Error::Config(format!("groundstate.bracket {:?} is not an interval in (0, ∞)", g.bracket)));
        }
        if !(g.r_start < g.match_radius && g.match_radius < g.r_max) || g.tail_window >= g.r_max - g.match_radius {
            return Err(Error::Config("need r_start < match_radius < r_max - tail_window".into()));
        }
        self.verify.validate()
    }
}
