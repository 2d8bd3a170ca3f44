//! Random device orientation and the facing/elevation ranges that keep the
//! AP inside the receiver field of view.
//!
//! The elevation `θ` follows a Laplace law truncated to `[0, 90]`; the facing
//! direction `Ω` is uniform on the circle. For a fixed location the incidence
//! cosine is `Λ(Ω) = κ1 cos(Ω − bearing) + κ2` at fixed `θ`, or
//! `√(λ1² + λ2²) cos(θ − θ0)` at fixed `Ω`, with `θ0 = tan⁻¹(λ1/λ2)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{check_range, Error, Result};
use crate::geometry::{
    acos_deg, atan2_deg, cos_deg, kappa_coefficients, lambda_coefficients, sin_deg, wrap_deg,
    LinkGeometry,
};

/// Static-user elevation statistics: mean 41°, standard deviation 7.68°.
pub const STATIC_USER_MEAN: f64 = 41.0;
pub const STATIC_USER_STD: f64 = 7.68;

const MIN_ELEVATION: f64 = 0.0;
const MAX_ELEVATION: f64 = 90.0;

/// Laplace(μ, b) truncated to `[lo, hi]`, all in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedLaplace {
    pub mu: f64,
    pub b: f64,
    pub lo: f64,
    pub hi: f64,
}

impl TruncatedLaplace {
    /// Location `mu` and scale `b`, truncated to the elevation range `[0, 90]`.
    pub fn new(mu: f64, b: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Laplace scale must be positive, got {b}"
            )));
        }
        Ok(Self {
            mu,
            b,
            lo: MIN_ELEVATION,
            hi: MAX_ELEVATION,
        })
    }

    /// From mean and standard deviation, using `b = σ/√2`.
    pub fn from_mean_std(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma / std::f64::consts::SQRT_2)
    }

    pub fn static_user() -> Self {
        Self::from_mean_std(STATIC_USER_MEAN, STATIC_USER_STD).expect("valid constants")
    }

    pub fn sigma(&self) -> f64 {
        self.b * std::f64::consts::SQRT_2
    }

    /// CDF of the untruncated Laplace law. This is also the approximation
    /// used for the blockage mass, where the truncation mass is neglected.
    pub fn untruncated_cdf(&self, theta: f64) -> f64 {
        let z = (theta - self.mu) / self.b;
        if z < 0.0 {
            0.5 * z.exp()
        } else {
            1.0 - 0.5 * (-z).exp()
        }
    }

    /// Upper tail `1 − G(θ)` without cancellation.
    fn untruncated_sf(&self, theta: f64) -> f64 {
        let z = (theta - self.mu) / self.b;
        if z < 0.0 {
            1.0 - 0.5 * z.exp()
        } else {
            0.5 * (-z).exp()
        }
    }

    /// `G(hi) − G(lo)`.
    pub fn normalization(&self) -> f64 {
        1.0 - self.untruncated_cdf(self.lo) - self.untruncated_sf(self.hi)
    }

    /// Density per degree; zero outside `[lo, hi]`.
    pub fn pdf(&self, theta: f64) -> f64 {
        if theta < self.lo || theta > self.hi {
            return 0.0;
        }
        (-(theta - self.mu).abs() / self.b).exp() / (2.0 * self.b * self.normalization())
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        if theta <= self.lo {
            0.0
        } else if theta >= self.hi {
            1.0
        } else {
            ((self.untruncated_cdf(theta) - self.untruncated_cdf(self.lo)) / self.normalization())
                .clamp(0.0, 1.0)
        }
    }

    /// Inverse CDF; `quantile(0) = lo`, `quantile(1) = hi`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lo;
        }
        if u >= 1.0 {
            return self.hi;
        }
        let z = self.normalization();
        let p = self.untruncated_cdf(self.lo) + u * z;
        let x = if p < 0.5 {
            self.mu + self.b * (2.0 * p).ln()
        } else {
            let q = self.untruncated_sf(self.hi) + (1.0 - u) * z;
            self.mu - self.b * (2.0 * q).ln()
        };
        x.clamp(self.lo, self.hi)
    }

    /// One inverse-CDF draw; consumes exactly one `u64` from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

/// Outcome of the critical-elevation computation at a fixed facing direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "theta", rename_all = "kebab-case")]
pub enum CriticalElevation {
    /// The AP leaves the FOV once `θ` exceeds this angle.
    Angle(f64),
    /// The boundary lies beyond 90°; no admissible `θ` loses the AP.
    NeverBlocked,
    /// No admissible `θ` brings the AP into the FOV.
    AlwaysBlocked,
}

/// `θ_ce = cos⁻¹(cos Ψ_c / √(λ1² + λ2²)) + tan⁻¹(λ1/λ2)`.
pub fn critical_elevation(g: &LinkGeometry, facing: f64, fov: f64) -> CriticalElevation {
    let (l1, l2) = lambda_coefficients(g, facing);
    let amp = l1.hypot(l2);
    let Some(half_width) = acos_deg(cos_deg(fov) / amp) else {
        return CriticalElevation::AlwaysBlocked;
    };
    let theta_ce = half_width + atan2_deg(l1, l2);
    if theta_ce > MAX_ELEVATION {
        CriticalElevation::NeverBlocked
    } else if theta_ce < MIN_ELEVATION {
        CriticalElevation::AlwaysBlocked
    } else {
        CriticalElevation::Angle(theta_ce)
    }
}

/// Elevations `lo ≤ θ ≤ hi` (within `[0, 90]`) that keep the AP in view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElevationWindow {
    pub lo: f64,
    pub hi: f64,
}

pub fn visible_elevations(g: &LinkGeometry, facing: f64, fov: f64) -> Option<ElevationWindow> {
    let (l1, l2) = lambda_coefficients(g, facing);
    let amp = l1.hypot(l2);
    let half_width = acos_deg(cos_deg(fov) / amp)?;
    let center = atan2_deg(l1, l2);
    let lo = (center - half_width).max(MIN_ELEVATION);
    let hi = (center + half_width).min(MAX_ELEVATION);
    (lo <= hi).then_some(ElevationWindow { lo, hi })
}

/// `Pr{cos ψ < cos Ψ_c}` under the elevation law with the truncation mass
/// neglected (`G(90) − G(0) ≈ 1`). With a single crossing this is
/// `1 − ½ exp((θ_ce − μ)/b)` for `θ_ce < μ` and `½ exp(−(θ_ce − μ)/b)`
/// otherwise; a second, low-elevation crossing adds its own tail.
pub fn blocked_mass_approx(g: &LinkGeometry, facing: f64, fov: f64, law: &TruncatedLaplace) -> f64 {
    match visible_elevations(g, facing, fov) {
        None => 1.0,
        Some(w) => {
            let mut mass = 0.0;
            if w.lo > law.lo {
                mass += law.untruncated_cdf(w.lo);
            }
            if w.hi < law.hi {
                mass += law.untruncated_sf(w.hi);
            }
            mass.clamp(0.0, 1.0)
        }
    }
}

/// Exact `Pr{AP outside FOV}` under the truncated elevation law.
pub fn blocked_mass_exact(g: &LinkGeometry, facing: f64, fov: f64, law: &TruncatedLaplace) -> f64 {
    match visible_elevations(g, facing, fov) {
        None => 1.0,
        Some(w) => (1.0 - (law.cdf(w.hi) - law.cdf(w.lo))).clamp(0.0, 1.0),
    }
}

/// Minimum critical elevation over all facing directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaThreshold {
    /// `Ψ_c + sin⁻¹(h/d) − 90`, unclamped (negative when even a flat device
    /// loses the AP for some facing directions).
    pub raw: f64,
    /// The facing direction attaining the minimum, `180° + bearing`.
    pub facing: f64,
}

impl ThetaThreshold {
    pub fn clamped(&self) -> f64 {
        self.raw.clamp(MIN_ELEVATION, MAX_ELEVATION)
    }

    pub fn in_range(&self) -> bool {
        (MIN_ELEVATION..=MAX_ELEVATION).contains(&self.raw)
    }
}

pub fn theta_threshold(g: &LinkGeometry, fov: f64) -> ThetaThreshold {
    let elevation_of_ap = g.vertical_ratio().min(1.0).asin().to_degrees();
    ThetaThreshold {
        raw: fov + elevation_of_ap - 90.0,
        facing: wrap_deg(180.0 + g.bearing),
    }
}

/// Facing directions (degrees) for which the LOS gain is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OmegaRange {
    /// Every facing direction.
    FullCircle,
    /// No facing direction.
    Empty,
    /// `(start, end)` with `start < end`.
    SingleArc { start: f64, end: f64 },
    /// `[0, start) ∪ (end, 360]` with `start < end`.
    WraparoundPair { start: f64, end: f64 },
}

impl OmegaRange {
    pub fn kind(&self) -> &'static str {
        match self {
            OmegaRange::FullCircle => "full-circle",
            OmegaRange::Empty => "empty",
            OmegaRange::SingleArc { .. } => "single-arc",
            OmegaRange::WraparoundPair { .. } => "wraparound-pair",
        }
    }

    pub fn endpoints(&self) -> Option<(f64, f64)> {
        match *self {
            OmegaRange::SingleArc { start, end } | OmegaRange::WraparoundPair { start, end } => {
                Some((start, end))
            }
            _ => None,
        }
    }

    /// Angular measure in degrees.
    pub fn measure(&self) -> f64 {
        match *self {
            OmegaRange::FullCircle => 360.0,
            OmegaRange::Empty => 0.0,
            OmegaRange::SingleArc { start, end } => end - start,
            OmegaRange::WraparoundPair { start, end } => 360.0 - (end - start),
        }
    }

    pub fn contains(&self, facing: f64) -> bool {
        let w = wrap_deg(facing);
        match *self {
            OmegaRange::FullCircle => true,
            OmegaRange::Empty => false,
            OmegaRange::SingleArc { start, end } => w > start && w < end,
            OmegaRange::WraparoundPair { start, end } => w < start || w > end,
        }
    }

    /// Angular distance from `facing` to the nearest endpoint, if any.
    pub fn distance_to_endpoint(&self, facing: f64) -> Option<f64> {
        let (a, b) = self.endpoints()?;
        let circ = |x: f64, y: f64| {
            let d = wrap_deg(x - y);
            d.min(360.0 - d)
        };
        Some(circ(facing, a).min(circ(facing, b)))
    }
}

/// Range of `Ω` keeping the AP in view at elevation `θ`.
///
/// Below the threshold elevation every direction works. Otherwise the two
/// roots of `Λ(Ω) = cos Ψ_c` split the circle and the slope of `Λ` at the
/// smaller root decides which side is visible.
pub fn omega_range(g: &LinkGeometry, theta: f64, fov: f64) -> Result<OmegaRange> {
    check_range("theta", theta, 0.0, 90.0, "[0, 90]")?;
    if theta <= theta_threshold(g, fov).raw {
        return Ok(OmegaRange::FullCircle);
    }
    let (k1, k2) = kappa_coefficients(g, theta)?;
    let floor = cos_deg(fov);
    if k1 <= f64::EPSILON * k2.max(1e-300) {
        return Ok(if k2 >= floor {
            OmegaRange::FullCircle
        } else {
            OmegaRange::Empty
        });
    }
    let arg = (floor - k2) / k1;
    if arg <= -1.0 {
        return Ok(OmegaRange::FullCircle);
    }
    if arg >= 1.0 {
        return Ok(OmegaRange::Empty);
    }
    let half_width = arg.acos().to_degrees();
    let first = wrap_deg(g.bearing + half_width);
    let second = wrap_deg(g.bearing - half_width);
    let (start, end) = if first <= second {
        (first, second)
    } else {
        (second, first)
    };
    let slope = -k1 * sin_deg(start - g.bearing);
    Ok(if slope < 0.0 {
        OmegaRange::WraparoundPair { start, end }
    } else {
        OmegaRange::SingleArc { start, end }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum StableOmegaRange {
    Range { range: OmegaRange },
    /// `Ψ_c < cos⁻¹(r/d)`: the horizontal-device evaluation is not meaningful.
    NotApplicable,
}

/// Facing directions that keep the AP in view for every `θ ∈ [0, 90]`,
/// i.e. the range at `θ = 90°`. Empty when even a flat device is blocked.
pub fn omega_range_all_theta(g: &LinkGeometry, fov: f64) -> Result<StableOmegaRange> {
    let validity = g.horizontal_ratio().clamp(-1.0, 1.0).acos().to_degrees();
    if fov < validity - 1e-9 {
        return Ok(StableOmegaRange::NotApplicable);
    }
    let range = if g.vertical_ratio() < cos_deg(fov) {
        OmegaRange::Empty
    } else {
        omega_range(g, 90.0, fov)?
    };
    Ok(StableOmegaRange::Range { range })
}

/// `Pr{H = 0}` at elevation `θ` with `Ω` uniform on the circle.
pub fn prob_los_blocked(g: &LinkGeometry, theta: f64, fov: f64) -> Result<f64> {
    Ok(1.0 - omega_range(g, theta, fov)?.measure() / 360.0)
}
