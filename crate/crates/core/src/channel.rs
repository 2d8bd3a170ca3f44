//! Line-of-sight DC gain for a Lambertian LED and a FOV-limited photodiode.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cos_deg, cos_incidence, cos_radiance, sin_deg, LinkGeometry};

/// Front-end and PHY parameters. `Default` is the reference parameter set
/// (AP at 2 m, 60° LED semiangle, 1 cm² PD, 10 MHz, 1024 subcarriers) with a
/// 90° receiver FOV and 1 W optical power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyParams {
    /// Photodiode area, m².
    pub a_pd: f64,
    /// LED semiangle at half power, degrees.
    pub phi_half: f64,
    /// Concentrator refractive index.
    pub refractive_index: f64,
    /// Receiver field-of-view half-angle Ψ_c, degrees.
    pub fov: f64,
    /// Photodiode responsivity, A/W.
    pub responsivity: f64,
    /// Modulation bandwidth, Hz.
    pub bandwidth: f64,
    /// Total number of OFDM subcarriers.
    pub subcarriers: u32,
    /// Noise power spectral density, A²/Hz.
    pub noise_psd: f64,
    /// DC-bias conversion factor η.
    pub eta: f64,
    /// Transmitted optical power, W.
    pub p_opt: f64,
}

impl Default for PhyParams {
    fn default() -> Self {
        Self {
            a_pd: 1e-4,
            phi_half: 60.0,
            refractive_index: 1.0,
            fov: 90.0,
            responsivity: 1.0,
            bandwidth: 10e6,
            subcarriers: 1024,
            noise_psd: 1e-21,
            eta: 3.0,
            p_opt: 1.0,
        }
    }
}

impl PhyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a_pd", self.a_pd),
            ("refractive_index", self.refractive_index),
            ("responsivity", self.responsivity),
            ("bandwidth", self.bandwidth),
            ("noise_psd", self.noise_psd),
            ("eta", self.eta),
            ("p_opt", self.p_opt),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if !(self.phi_half > 0.0 && self.phi_half < 90.0) {
            return Err(Error::OutOfRange {
                what: "phi_half",
                value: self.phi_half,
                range: "(0, 90)",
            });
        }
        if !(self.fov > 0.0 && self.fov <= 90.0) {
            return Err(Error::OutOfRange {
                what: "fov",
                value: self.fov,
                range: "(0, 90]",
            });
        }
        if self.subcarriers < 4 || self.subcarriers % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "subcarriers must be even and at least 4, got {}",
                self.subcarriers
            )));
        }
        Ok(())
    }

    /// Lambertian order `m = −1 / log₂(cos Φ½)`.
    pub fn lambertian_order(&self) -> f64 {
        -1.0 / cos_deg(self.phi_half).log2()
    }

    /// Concentrator gain `ς² / sin² Ψ_c`.
    pub fn concentrator_gain(&self) -> f64 {
        let s = sin_deg(self.fov);
        self.refractive_index * self.refractive_index / (s * s)
    }
}

/// Scenario constants of the simplified gain `H = H0 cos ψ / d^(m+2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConstants {
    /// Lambertian order.
    pub m: f64,
    /// Concentrator gain.
    pub g_f: f64,
    /// `(m+1) A_pd g_f h^m / 2π`.
    pub h0: f64,
}

pub fn channel_constants(p: &PhyParams, h: f64) -> Result<ChannelConstants> {
    p.validate()?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "vertical distance must be positive, got {h}"
        )));
    }
    let m = p.lambertian_order();
    if !m.is_finite() {
        return Err(Error::OutOfRange {
            what: "phi_half",
            value: p.phi_half,
            range: "(0, 90)",
        });
    }
    let g_f = p.concentrator_gain();
    let h0 = (m + 1.0) * p.a_pd * g_f * h.powf(m) / (2.0 * PI);
    Ok(ChannelConstants { m, g_f, h0 })
}

impl ChannelConstants {
    /// `H0 / d^(m+2)`: the gain per unit `cos ψ` at this distance.
    pub fn gain_scale(&self, g: &LinkGeometry) -> f64 {
        self.h0 / g.d.powf(self.m + 2.0)
    }
}

/// Whether the AP lies inside the receiver FOV. The boundary `ψ = Ψ_c`
/// counts as inside; an AP behind the PD plane never does.
pub fn in_fov(cos_psi: f64, fov: f64) -> bool {
    cos_psi >= cos_deg(fov) && cos_psi >= 0.0
}

/// LOS gain `H0 cos ψ / d^(m+2)`, zero outside the FOV.
pub fn los_gain(
    c: &ChannelConstants,
    g: &LinkGeometry,
    theta: f64,
    facing: f64,
    fov: f64,
) -> Result<f64> {
    let cos_psi = cos_incidence(g, theta, facing)?;
    Ok(gain_from_cos(c, g, cos_psi, fov))
}

pub(crate) fn gain_from_cos(c: &ChannelConstants, g: &LinkGeometry, cos_psi: f64, fov: f64) -> f64 {
    if in_fov(cos_psi, fov) {
        c.gain_scale(g) * cos_psi
    } else {
        0.0
    }
}

/// LOS gain from the unsimplified expression
/// `(m+1) A_pd g_f cos^m φ cos ψ / (2π d²)`, computed from `p` directly.
pub fn los_gain_full(p: &PhyParams, g: &LinkGeometry, theta: f64, facing: f64) -> Result<f64> {
    p.validate()?;
    let cos_psi = cos_incidence(g, theta, facing)?;
    if !in_fov(cos_psi, p.fov) {
        return Ok(0.0);
    }
    let m = p.lambertian_order();
    let cos_phi = cos_radiance(g);
    Ok((m + 1.0) * p.a_pd * p.concentrator_gain() * cos_phi.powf(m) * cos_psi
        / (2.0 * PI * g.d * g.d))
}
