use serde::{Deserialize, Serialize};

use crate::channel::{channel_constants, ChannelConstants, PhyParams};
use crate::error::{check_range, Error, Result};
use crate::geometry::{link_geometry, LinkGeometry, Vec3};
use crate::linkstats::{gain_distribution, snr_model, GainDistribution, SnrModel};
use crate::orientation::{TruncatedLaplace, STATIC_USER_MEAN, STATIC_USER_STD};

/// Elevation angle model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ElevationModel {
    Fixed { theta: f64 },
    Laplace { mu: f64, sigma: f64 },
}

impl Default for ElevationModel {
    fn default() -> Self {
        ElevationModel::Laplace {
            mu: STATIC_USER_MEAN,
            sigma: STATIC_USER_STD,
        }
    }
}

impl ElevationModel {
    pub fn law(&self) -> Result<Option<TruncatedLaplace>> {
        match *self {
            ElevationModel::Fixed { theta } => {
                check_range("theta", theta, 0.0, 90.0, "[0, 90]")?;
                Ok(None)
            }
            ElevationModel::Laplace { mu, sigma } => TruncatedLaplace::from_mean_std(mu, sigma).map(Some),
        }
    }
}

/// Facing-direction model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FacingModel {
    Fixed { omega: f64 },
    #[default]
    Uniform,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrientationModel {
    #[serde(default)]
    pub elevation: ElevationModel,
    #[serde(default)]
    pub facing: FacingModel,
}

/// Everything a link computation reads: AP and UE positions, PHY
/// parameters and the orientation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub ap: Vec3,
    pub ue: Vec3,
    #[serde(default)]
    pub phy: PhyParams,
    #[serde(default)]
    pub orientation: OrientationModel,
}

impl Scenario {
    /// AP at (0, 0, 2) and the reference parameters.
    pub fn reference(ue: Vec3, orientation: OrientationModel) -> Self {
        Self {
            ap: Vec3::new(0.0, 0.0, 2.0),
            ue,
            phy: PhyParams::default(),
            orientation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phy.validate()?;
        self.geometry()?;
        self.orientation.elevation.law()?;
        if let FacingModel::Fixed { omega } = self.orientation.facing {
            if !omega.is_finite() {
                return Err(Error::InvalidParameter(format!("omega must be finite, got {omega}")));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<LinkGeometry> {
        link_geometry(self.ue, self.ap)
    }

    pub fn constants(&self) -> Result<ChannelConstants> {
        channel_constants(&self.phy, self.geometry()?.h)
    }

    /// The clipped-Laplace gain model; needs a Laplace elevation and a fixed
    /// facing direction.
    pub fn gain_distribution(&self) -> Result<GainDistribution> {
        let (law, facing) = match (self.orientation.elevation.law()?, self.orientation.facing) {
            (Some(law), FacingModel::Fixed { omega }) => (law, omega),
            _ => {
                return Err(Error::Unsupported(
                    "a Laplace elevation model and a fixed facing direction",
                ))
            }
        };
        gain_distribution(&self.constants()?, &self.geometry()?, facing, self.phy.fov, &law)
    }

    pub fn snr_model(&self) -> Result<SnrModel> {
        snr_model(&self.phy, &self.gain_distribution()?)
    }

    pub fn with_power(mut self, p_opt: f64) -> Self {
        self.phy.p_opt = p_opt;
        self
    }

    pub fn with_orientation(mut self, orientation: OrientationModel) -> Self {
        self.orientation = orientation;
        self
    }
}
