//! Vectors, device rotations and the incidence-angle geometry of the downlink.
//!
//! Every public angle is in degrees. The device frame starts aligned with the
//! room frame (normal `[0, 0, 1]`) and is rotated intrinsically by yaw `α`
//! about z, pitch `β` about x and roll `γ` about y, giving `R = R_α R_β R_γ`.
//!
//! The facing direction `Ω` is the azimuth of the normal shifted by 180°.
//! With it, the incidence cosine takes the compact form
//! `cos ψ = λ1 sin θ + λ2 cos θ`, where `λ1 = (r/d) cos(Ω − bearing)` and
//! `λ2 = h/d`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Tolerance used when an inverse-trig argument lands just outside `[-1, 1]`.
pub(crate) const TRIG_CLAMP_EPS: f64 = 1e-12;

/// `sin` of an angle in degrees, exact wherever [`cos_deg`] is.
pub fn sin_deg(deg: f64) -> f64 {
    cos_deg(deg - 90.0)
}

/// `cos` of an angle in degrees, exact at multiples of 90° and at ±60°, ±120°.
pub fn cos_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        1.0
    } else if r == 90.0 || r == 270.0 {
        0.0
    } else if r == 180.0 {
        -1.0
    } else if r == 60.0 || r == 300.0 {
        0.5
    } else if r == 120.0 || r == 240.0 {
        -0.5
    } else {
        r.to_radians().cos()
    }
}

/// Four-quadrant arctangent in degrees, in `(-180, 180]`.
pub fn atan2_deg(y: f64, x: f64) -> f64 {
    y.atan2(x).to_degrees()
}

/// Wraps an angle to `[0, 360)`.
pub fn wrap_deg(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// `acos` in degrees, tolerating arguments within [`TRIG_CLAMP_EPS`] of ±1.
pub(crate) fn acos_deg(x: f64) -> Option<f64> {
    if x.abs() <= 1.0 {
        Some(x.acos().to_degrees())
    } else if x.abs() <= 1.0 + TRIG_CLAMP_EPS {
        Some(x.clamp(-1.0, 1.0).acos().to_degrees())
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

/// Intrinsic yaw/pitch/roll as reported by handset orientation sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    /// Yaw about z, `[0, 360)`.
    pub alpha: f64,
    /// Pitch about x, `[-180, 180)`.
    pub beta: f64,
    /// Roll about y, `[-90, 90)`.
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let e = Self { alpha, beta, gamma };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        half_open("alpha", self.alpha, 0.0, 360.0, "[0, 360)")?;
        half_open("beta", self.beta, -180.0, 180.0, "[-180, 180)")?;
        half_open("gamma", self.gamma, -90.0, 90.0, "[-90, 90)")
    }
}

fn half_open(what: &'static str, v: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if v.is_finite() && v >= lo && v < hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value: v, range })
    }
}

/// UE location plus the polar/azimuth description of its normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    /// Polar (elevation) angle of the normal, `[0, 90]`.
    pub theta: f64,
    /// Azimuth of the normal, `[0, 360)`.
    pub omega: f64,
}

impl Pose {
    pub fn new(position: Vec3, theta: f64, omega: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, 90.0, "[0, 90]")?;
        Ok(Self {
            position,
            theta,
            omega: wrap_deg(omega),
        })
    }

    /// Builds a pose from the user's facing direction `Ω` instead of `ω`.
    pub fn facing(position: Vec3, theta: f64, facing: f64) -> Result<Self> {
        Self::new(position, theta, facing + 180.0)
    }

    pub fn from_euler(position: Vec3, e: &EulerAngles) -> Result<Self> {
        let (theta, omega) = euler_to_polar_azimuth(e)?;
        Self::new(position, theta, omega)
    }

    /// Facing direction `Ω = (ω + 180) mod 360`.
    pub fn facing_deg(&self) -> f64 {
        wrap_deg(self.omega + 180.0)
    }

    /// Unit normal `[sin θ cos ω, sin θ sin ω, cos θ]`.
    pub fn normal(&self) -> Vec3 {
        let st = sin_deg(self.theta);
        Vec3::new(
            st * cos_deg(self.omega),
            st * sin_deg(self.omega),
            cos_deg(self.theta),
        )
    }
}

/// Distances between the AP and the UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Horizontal distance, m.
    pub r: f64,
    /// Vertical distance, m (always positive).
    pub h: f64,
    /// Euclidean distance, m.
    pub d: f64,
    /// Direction from the AP to the UE in the horizontal plane, `[0, 360)`.
    /// Zero when the UE sits directly below the AP.
    pub bearing: f64,
}

impl LinkGeometry {
    pub fn new(ue: Vec3, ap: Vec3) -> Result<Self> {
        link_geometry(ue, ap)
    }

    /// `λ2 = h/d`.
    pub fn vertical_ratio(&self) -> f64 {
        self.h / self.d
    }

    /// `r/d`.
    pub fn horizontal_ratio(&self) -> f64 {
        self.r / self.d
    }
}

/// `R = R_α R_β R_γ` for the given yaw, pitch and roll.
pub fn rotation_matrix(e: &EulerAngles) -> Result<Mat3> {
    e.validate()?;
    let (sa, ca) = (sin_deg(e.alpha), cos_deg(e.alpha));
    let (sb, cb) = (sin_deg(e.beta), cos_deg(e.beta));
    let (sg, cg) = (sin_deg(e.gamma), cos_deg(e.gamma));
    let yaw = Mat3([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]]);
    let pitch = Mat3([[1.0, 0.0, 0.0], [0.0, cb, -sb], [0.0, sb, cb]]);
    let roll = Mat3([[cg, 0.0, sg], [0.0, 1.0, 0.0], [-sg, 0.0, cg]]);
    Ok(yaw * pitch * roll)
}

/// The device normal after rotation, i.e. `R · [0, 0, 1]`.
pub fn rotated_normal(e: &EulerAngles) -> Result<Vec3> {
    Ok(rotation_matrix(e)?.column(2))
}

/// Polar angle `θ` and azimuth `ω` of the rotated normal, both in degrees.
///
/// Orientations that tip the normal below the horizon (`cos β cos γ < 0`) are
/// rejected. At `θ = 0` the azimuth is undefined and reported as 0.
pub fn euler_to_polar_azimuth(e: &EulerAngles) -> Result<(f64, f64)> {
    let n = rotated_normal(e)?;
    let cos_theta = cos_deg(e.beta) * cos_deg(e.gamma);
    if cos_theta < 0.0 {
        return Err(Error::OutOfRange {
            what: "cos(beta)cos(gamma)",
            value: cos_theta,
            range: "[0, 1] (normal above the horizon)",
        });
    }
    let theta = cos_theta.min(1.0).acos().to_degrees();
    let omega = if n.x == 0.0 && n.y == 0.0 {
        0.0
    } else {
        wrap_deg(atan2_deg(n.y, n.x))
    };
    Ok((theta, omega))
}

pub fn link_geometry(ue: Vec3, ap: Vec3) -> Result<LinkGeometry> {
    if ap.z.is_nan() || ue.z.is_nan() || ap.z <= ue.z {
        return Err(Error::UeNotBelowAp {
            ap_z: ap.z,
            ue_z: ue.z,
        });
    }
    let dx = ue.x - ap.x;
    let dy = ue.y - ap.y;
    let r = dx.hypot(dy);
    let h = ap.z - ue.z;
    let d = r.hypot(h);
    let bearing = if r == 0.0 {
        0.0
    } else {
        wrap_deg(atan2_deg(dy, dx))
    };
    Ok(LinkGeometry { r, h, d, bearing })
}

/// `(λ1, λ2)` for facing direction `Ω`.
pub fn lambda_coefficients(g: &LinkGeometry, facing: f64) -> (f64, f64) {
    (
        g.horizontal_ratio() * cos_deg(facing - g.bearing),
        g.vertical_ratio(),
    )
}

/// `(κ1, κ2) = ((r/d) sin θ, (h/d) cos θ)`.
pub fn kappa_coefficients(g: &LinkGeometry, theta: f64) -> Result<(f64, f64)> {
    check_range("theta", theta, 0.0, 90.0, "[0, 90]")?;
    Ok((
        g.horizontal_ratio() * sin_deg(theta),
        g.vertical_ratio() * cos_deg(theta),
    ))
}

/// `cos ψ = λ1 sin θ + λ2 cos θ`.
pub fn cos_incidence(g: &LinkGeometry, theta: f64, facing: f64) -> Result<f64> {
    check_range("theta", theta, 0.0, 90.0, "[0, 90]")?;
    let (l1, l2) = lambda_coefficients(g, facing);
    Ok(l1 * sin_deg(theta) + l2 * cos_deg(theta))
}

/// `cos ψ = −(d · n) / |d|` with `d` pointing from the AP to the UE.
pub fn cos_incidence_vector(ue: Vec3, ap: Vec3, normal: Vec3) -> f64 {
    let d = ue - ap;
    -d.dot(normal) / d.norm()
}

/// Cosine of the radiance angle for a downward-facing AP, `h/d`.
pub fn cos_radiance(g: &LinkGeometry) -> f64 {
    g.vertical_ratio()
}

/// Elevation `tan⁻¹(λ1/λ2)` at which `cos ψ` peaks; negative when facing away.
pub fn peak_elevation(g: &LinkGeometry, facing: f64) -> f64 {
    let (l1, l2) = lambda_coefficients(g, facing);
    atan2_deg(l1, l2)
}
