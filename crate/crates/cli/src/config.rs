use std::path::Path;

use lifi_core::{ElevationModel, FacingModel, OrientationModel, PhyParams, Scenario, TruncatedLaplace, Vec3};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Reference scenario shipped with the binary.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/reference.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub z: f64,
}

impl From<&Point> for Vec3 {
    fn from(p: &Point) -> Vec3 {
        Vec3::new(p.x, p.y, p.z)
    }
}

/// Orientation block: a Laplace elevation (`mu_theta`, `sigma_theta`) or a
/// fixed `theta`, and an optional fixed facing direction `omega` (uniform
/// when absent).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrientationBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Theta,
    Omega,
    R,
    POpt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub fn new(variable: SweepVariable, start: f64, stop: f64, step: f64) -> Self {
        Self { variable, start, stop, step }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step > 0.0 && self.stop >= self.start) {
            return Err(CliError::Config(format!(
                "sweep: need finite start <= stop and step > 0 (got {} to {} step {})",
                self.start, self.stop, self.step
            )));
        }
        if (self.stop - self.start) / self.step > 1e7 {
            return Err(CliError::Config("sweep: more than 1e7 grid points".into()));
        }
        Ok(())
    }

    /// Grid points `start + k·step` up to `stop` (inclusive within rounding).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub ap: Point,
    pub ue: Point,
    #[serde(default)]
    pub phy: PhyParams,
    #[serde(default)]
    pub orientation: OrientationBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl ScenarioFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Self::parse_toml(DEFAULT_SCENARIO, "built-in reference.toml");
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let name = path.display().to_string();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::parse_json(&text, &name)
        } else {
            Self::parse_toml(&text, &name)
        }
    }

    pub fn parse_toml(text: &str, name: &str) -> Result<Self, CliError> {
        let file: Self = toml::from_str(text).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        file.validate().map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        Ok(file)
    }

    pub fn parse_json(text: &str, name: &str) -> Result<Self, CliError> {
        let file: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        file.validate().map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        Ok(file)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    fn validate(&self) -> Result<(), String> {
        self.to_scenario().and_then(|s| s.validate()).map_err(|e| e.to_string())?;
        let o = &self.orientation;
        if o.theta.is_some() && (o.mu_theta.is_some() || o.sigma_theta.is_some()) {
            return Err("orientation: give either `theta` or `mu_theta`/`sigma_theta`, not both".into());
        }
        if let Some(sw) = &self.sweep {
            sw.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn elevation(&self) -> ElevationModel {
        let o = &self.orientation;
        match o.theta {
            Some(theta) => ElevationModel::Fixed { theta },
            None => ElevationModel::Laplace {
                mu: o.mu_theta.unwrap_or(lifi_core::orientation::STATIC_USER_MEAN),
                sigma: o.sigma_theta.unwrap_or(lifi_core::orientation::STATIC_USER_STD),
            },
        }
    }

    pub fn facing(&self) -> FacingModel {
        match self.orientation.omega {
            Some(omega) => FacingModel::Fixed { omega },
            None => FacingModel::Uniform,
        }
    }

    pub fn to_scenario(&self) -> lifi_core::Result<Scenario> {
        Ok(Scenario {
            ap: (&self.ap).into(),
            ue: (&self.ue).into(),
            phy: self.phy,
            orientation: OrientationModel {
                elevation: self.elevation(),
                facing: self.facing(),
            },
        })
    }

    /// The Laplace elevation law, if the file describes one.
    pub fn law(&self) -> Option<TruncatedLaplace> {
        self.elevation().law().ok().flatten()
    }
}
