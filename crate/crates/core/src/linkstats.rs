//! Gain and SNR statistics under random orientation, and average BER of
//! M-QAM DCO-OFDM.
//!
//! Conditioned on the AP being in view, the gain is modelled as a Laplace
//! law clipped to `[h_min, h_max]`, obtained by linearising `cos ψ` around the
//! mean elevation. The blocked fraction `c_H` is a point mass at zero.

use serde::Serialize;

use crate::channel::{los_gain, ChannelConstants, PhyParams};
use crate::error::{Error, Result};
use crate::geometry::{atan2_deg, cos_deg, lambda_coefficients, sin_deg, LinkGeometry};
use crate::orientation::{blocked_mass_approx, critical_elevation, CriticalElevation, TruncatedLaplace};
use crate::quadrature::{integrate_with_breaks, Tolerance};

/// Square QAM constellation size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModulationOrder(u32);

impl ModulationOrder {
    pub const QAM4: ModulationOrder = ModulationOrder(4);
    pub const QAM16: ModulationOrder = ModulationOrder(16);

    /// Accepts 4, 16, 64, ... (powers of four).
    pub fn new(m: u32) -> Result<Self> {
        if m >= 4 && m.is_power_of_two() && m.trailing_zeros() % 2 == 0 {
            Ok(Self(m))
        } else {
            Err(Error::InvalidParameter(format!(
                "modulation order must be a power of 4 (4, 16, 64, ...), got {m}"
            )))
        }
    }

    pub fn m(&self) -> u32 {
        self.0
    }

    pub fn bits(&self) -> u32 {
        self.0.trailing_zeros()
    }

    /// `c_M = (4/log₂M)(1 − 1/√M)`.
    pub fn c_m(&self) -> f64 {
        let m = f64::from(self.0);
        4.0 / f64::from(self.bits()) * (1.0 - 1.0 / m.sqrt())
    }
}

/// Clipped-Laplace model of the LOS gain at a fixed location and facing
/// direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainDistribution {
    pub mu_h: f64,
    pub b_h: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Probability that the gain is exactly zero.
    pub c_h: f64,
    pub theta_ce: CriticalElevation,
    /// `H0/d^(m+2)`.
    pub scale: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Below this relative size `b_H` is treated as zero.
const DEGENERATE_REL: f64 = 1e-12;

pub fn gain_distribution(
    c: &ChannelConstants,
    g: &LinkGeometry,
    facing: f64,
    fov: f64,
    law: &TruncatedLaplace,
) -> Result<GainDistribution> {
    if !(fov > 0.0 && fov <= 90.0) {
        return Err(Error::OutOfRange {
            what: "fov",
            value: fov,
            range: "(0, 90]",
        });
    }
    let (l1, l2) = lambda_coefficients(g, facing);
    let k = c.gain_scale(g);
    let (s, co) = (sin_deg(law.mu), cos_deg(law.mu));
    let floor = cos_deg(fov);
    let lo = l1.min(l2);
    let h_min = if lo < floor { k * floor } else { k * lo };
    let h_max = if l1 < 0.0 { k * l2 } else { k * l1.hypot(l2) };
    let theta_ce = critical_elevation(g, facing, fov);
    Ok(GainDistribution {
        mu_h: k * (l1 * s + l2 * co),
        b_h: k * law.b.to_radians() * (l1 * co - l2 * s).abs(),
        h_min,
        h_max,
        c_h: blocked_mass_approx(g, facing, fov, law),
        theta_ce,
        scale: k,
        lambda1: l1,
        lambda2: l2,
    })
}

impl GainDistribution {
    pub fn always_blocked(&self) -> bool {
        self.theta_ce == CriticalElevation::AlwaysBlocked || self.c_h >= 1.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.b_h <= DEGENERATE_REL * self.scale
    }

    /// `2 − exp(−(h_max − μ_H)/b_H)`.
    fn denom(&self) -> f64 {
        2.0 - (-(self.h_max - self.mu_h) / self.b_h).exp()
    }

    /// Integral of the clipped-Laplace density from `h_min` to `hbar`
    /// (no point mass); `hbar` is clamped to the support.
    fn partial_mass(&self, hbar: f64) -> f64 {
        if hbar <= self.h_min {
            return 0.0;
        }
        let x = hbar.min(self.h_max);
        let (mu, b) = (self.mu_h, self.b_h);
        let num = if x <= mu {
            ((x - mu) / b).exp() - ((self.h_min - mu) / b).exp()
        } else if self.h_min <= mu {
            2.0 - ((self.h_min - mu) / b).exp() - (-(x - mu) / b).exp()
        } else {
            (-(self.h_min - mu) / b).exp() - (-(x - mu) / b).exp()
        };
        num / self.denom()
    }

    /// Mass of the continuous part on `[h_min, h_max]`.
    pub fn continuous_mass(&self) -> f64 {
        if self.always_blocked() {
            0.0
        } else if self.is_degenerate() {
            1.0 - self.c_h
        } else {
            self.partial_mass(self.h_max)
        }
    }

    /// `c_H` plus the continuous mass; 1 up to the clipping error of the model.
    pub fn total_mass(&self) -> f64 {
        self.c_h + self.continuous_mass()
    }

    /// CDF of the continuous part conditioned on a nonzero gain.
    pub fn conditional_cdf(&self, hbar: f64) -> Result<f64> {
        if self.always_blocked() {
            return Err(Error::NoContinuousSamples);
        }
        if self.is_degenerate() {
            return Err(Error::DegenerateScale);
        }
        Ok((self.partial_mass(hbar) / self.continuous_mass()).clamp(0.0, 1.0))
    }
}

/// Continuous part of the gain density; the point mass `c_H` is reported
/// separately by the distribution.
pub fn gain_pdf(dist: &GainDistribution, hbar: f64) -> Result<f64> {
    if dist.always_blocked() {
        return Ok(0.0);
    }
    if dist.is_degenerate() {
        return Err(Error::DegenerateScale);
    }
    if hbar < dist.h_min || hbar > dist.h_max {
        return Ok(0.0);
    }
    Ok((-(hbar - dist.mu_h).abs() / dist.b_h).exp() / (dist.b_h * dist.denom()))
}

/// Gain CDF including the jump `c_H` at zero.
pub fn gain_cdf(dist: &GainDistribution, hbar: f64) -> Result<f64> {
    if hbar < 0.0 {
        return Ok(0.0);
    }
    if dist.always_blocked() {
        return Ok(1.0);
    }
    if dist.is_degenerate() {
        return Err(Error::DegenerateScale);
    }
    Ok(dist.c_h + dist.partial_mass(hbar))
}

/// `S0 = R²P²/((K−2)η²σ_k²)` with `σ_k² = N0 B / K`.
pub fn snr_scale(p: &PhyParams) -> Result<f64> {
    p.validate()?;
    let k = f64::from(p.subcarriers);
    let sigma2 = p.noise_psd * p.bandwidth / k;
    let rp = p.responsivity * p.p_opt;
    Ok(rp * rp / ((k - 2.0) * p.eta * p.eta * sigma2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrModel {
    pub s0: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub gain: GainDistribution,
}

pub fn snr_model(p: &PhyParams, dist: &GainDistribution) -> Result<SnrModel> {
    let s0 = snr_scale(p)?;
    Ok(SnrModel {
        s0,
        s_min: s0 * dist.h_min * dist.h_min,
        s_max: s0 * dist.h_max * dist.h_max,
        gain: *dist,
    })
}

/// Continuous part of the SNR density on `(s_min, s_max)`.
pub fn snr_pdf(m: &SnrModel, s: f64) -> Result<f64> {
    let g = &m.gain;
    if g.always_blocked() {
        return Ok(0.0);
    }
    if g.is_degenerate() {
        return Err(Error::DegenerateScale);
    }
    if s <= m.s_min || s >= m.s_max || s <= 0.0 {
        return Ok(0.0);
    }
    let rs0 = m.s0.sqrt();
    let num = (-(s.sqrt() - rs0 * g.mu_h).abs() / (rs0 * g.b_h)).exp();
    Ok(num / (2.0 * g.b_h * (m.s0 * s).sqrt() * g.denom()))
}

pub fn snr_cdf(m: &SnrModel, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Ok(0.0);
    }
    gain_cdf(&m.gain, (s / m.s0).sqrt())
}

/// `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `P_e(s) = c_M Q(√(3s/(M−1)))`.
pub fn ber_awgn(s: f64, modulation: ModulationOrder) -> f64 {
    let m = f64::from(modulation.m());
    modulation.c_m() * q_function((3.0 * s.max(0.0) / (m - 1.0)).sqrt())
}

/// Tolerance for the BER integral. The absolute part is far below 1e-10
/// so that small BER values keep their relative accuracy.
pub const BER_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-18,
    rel: 1e-10,
    max_subdivisions: 10_000,
};

/// Exact average BER: `∫ P_e(s) f_S(s) ds + c_H c_M/2`, integrated in
/// `x = √s` to remove the `1/√s` factor.
pub fn ber_exact(m: &SnrModel, modulation: ModulationOrder) -> f64 {
    let g = &m.gain;
    let floor = 0.5 * g.c_h * modulation.c_m();
    if g.always_blocked() {
        return 0.5 * modulation.c_m();
    }
    if g.is_degenerate() {
        return ber_awgn(m.s0 * g.mu_h * g.mu_h, modulation) * (1.0 - g.c_h) + floor;
    }
    let rs0 = m.s0.sqrt();
    let (x_lo, x_hi, x_mu) = (rs0 * g.h_min, rs0 * g.h_max, rs0 * g.mu_h);
    let width = rs0 * g.b_h;
    let norm = 1.0 / (width * g.denom());
    let integrand = |x: f64| ber_awgn(x * x, modulation) * norm * (-(x - x_mu).abs() / width).exp();
    let mut breaks = vec![x_lo];
    if x_mu > x_lo && x_mu < x_hi {
        breaks.push(x_mu);
    }
    breaks.push(x_hi);
    integrate_with_breaks(integrand, &breaks, &BER_TOLERANCE).value + floor
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerApprox {
    pub value: f64,
    /// The raw closed form fell outside `[0, c_M/2]` and was clamped.
    pub clamped: bool,
}

/// Closed-form BER approximation.
pub fn ber_approx(m: &SnrModel, modulation: ModulationOrder) -> BerApprox {
    let g = &m.gain;
    let c_m = modulation.c_m();
    let floor = 0.5 * g.c_h * c_m;
    let raw = if g.always_blocked() {
        0.5 * c_m
    } else if g.mu_h <= g.h_min {
        let ratio = |num: f64| if num == 0.0 { 1.0 } else { (num / g.b_h).exp() };
        let delta0 = 0.5 * c_m * ratio(g.mu_h - g.h_min) / (2.0 - ratio(-(g.h_max - g.mu_h)));
        floor - delta0
    } else {
        ber_awgn(m.s0 * g.mu_h * g.mu_h, modulation) + floor
    };
    let value = raw.clamp(0.0, 0.5 * c_m);
    BerApprox {
        value,
        clamped: value != raw,
    }
}

/// BER at a deterministic orientation; a blocked link contributes `c_M/2`.
pub fn ber_fixed(
    c: &ChannelConstants,
    p: &PhyParams,
    g: &LinkGeometry,
    theta: f64,
    facing: f64,
    modulation: ModulationOrder,
) -> Result<f64> {
    let h = los_gain(c, g, theta, facing, p.fov)?;
    Ok(ber_awgn(snr_scale(p)? * h * h, modulation))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimumTilt {
    pub theta: f64,
    /// The unconstrained optimum is negative (AP behind the facing
    /// direction); `theta` is then 0.
    pub clamped: bool,
}

/// Elevation maximising the LOS gain, `tan⁻¹(λ1/λ2)`, within `[0, 90]`.
pub fn optimum_tilt(g: &LinkGeometry, facing: f64) -> OptimumTilt {
    let (l1, l2) = lambda_coefficients(g, facing);
    let raw = atan2_deg(l1, l2);
    if raw < 0.0 {
        OptimumTilt {
            theta: 0.0,
            clamped: true,
        }
    } else {
        OptimumTilt {
            theta: raw.min(90.0),
            clamped: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel_constants;
    use crate::geometry::{link_geometry, Vec3};
    use crate::quadrature::integrate;

    const AP: Vec3 = Vec3::new(0.0, 0.0, 2.0);

    fn setup(x: f64, y: f64, facing: f64, p: &PhyParams) -> (ChannelConstants, LinkGeometry, GainDistribution) {
        let g = link_geometry(Vec3::new(x, y, 0.0), AP).unwrap();
        let c = channel_constants(p, 2.0).unwrap();
        let law = TruncatedLaplace::static_user();
        let d = gain_distribution(&c, &g, facing, p.fov, &law).unwrap();
        (c, g, d)
    }

    fn tight() -> Tolerance {
        Tolerance {
            abs: 1e-14,
            rel: 1e-12,
            max_subdivisions: 10_000,
        }
    }

    #[test]
    fn modulation_orders() {
        assert_eq!(ModulationOrder::new(4).unwrap().c_m(), 1.0);
        assert!((ModulationOrder::new(16).unwrap().c_m() - 0.75).abs() < 1e-15);
        assert_eq!(ModulationOrder::new(64).unwrap().bits(), 6);
        for bad in [0, 2, 8, 32, 15] {
            assert!(ModulationOrder::new(bad).is_err());
        }
    }

    #[test]
    fn awgn_ber_values() {
        assert_eq!(ber_awgn(0.0, ModulationOrder::QAM4), 0.5);
        assert!((ber_awgn(0.0, ModulationOrder::QAM16) - 0.375).abs() < 1e-15);
        // Q(√10) from the series oracle below
        let x = 10f64.sqrt();
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= x * x / f64::from(2 * n + 1);
            sum += term;
        }
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let q_series = 0.5 - phi * sum;
        assert!((ber_awgn(10.0, ModulationOrder::QAM4) - q_series).abs() < 1e-12);
        assert!((q_series - 7.827e-4).abs() < 1e-7);
    }

    #[test]
    fn snr_scale_reference() {
        let p = PhyParams::default();
        let s0 = snr_scale(&p).unwrap();
        assert!((s0 / 1.1133e13 - 1.0).abs() < 1e-4);
        let p2 = PhyParams { p_opt: 2.0, ..p };
        assert!((snr_scale(&p2).unwrap() / s0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn blocked_mass_reference() {
        let p = PhyParams::default();
        let (_, _, d) = setup(3.0, 3.0, 225.0, &p);
        assert!((d.c_h - 0.973).abs() < 1e-3);
        assert!(d.lambda1 < 0.0);
        assert!((d.h_max - d.scale * d.lambda2).abs() < 1e-20);
        let (_, _, d) = setup(3.0, 3.0, 45.0, &p);
        assert_eq!(d.c_h, 0.0);
        assert_eq!(d.theta_ce, CriticalElevation::NeverBlocked);
    }

    #[test]
    fn cdf_matches_pdf_quadrature() {
        let p = PhyParams::default();
        for facing in [45.0, 225.0, 120.0] {
            let (_, _, d) = setup(3.0, 3.0, facing, &p);
            if d.is_degenerate() || d.always_blocked() {
                continue;
            }
            assert_eq!(gain_cdf(&d, d.h_min).unwrap(), d.c_h);
            for i in 1..20 {
                let h = d.h_min + (d.h_max - d.h_min) * f64::from(i) / 20.0;
                let mut br = vec![d.h_min];
                if d.mu_h > d.h_min && d.mu_h < h {
                    br.push(d.mu_h);
                }
                br.push(h);
                let q = integrate_with_breaks(|x| gain_pdf(&d, x).unwrap(), &br, &tight());
                assert!((gain_cdf(&d, h).unwrap() - d.c_h - q.value).abs() < 1e-9);
            }
            let total = d.total_mass();
            assert!((0.95..=1.05).contains(&total), "{total}");
        }
    }

    #[test]
    fn snr_change_of_variables() {
        let p = PhyParams::default();
        let (_, _, d) = setup(3.0, 3.0, 45.0, &p);
        let m = snr_model(&p, &d).unwrap();
        for i in 1..20 {
            let s = m.s_min + (m.s_max - m.s_min) * f64::from(i) / 20.0;
            let h = (s / m.s0).sqrt();
            let back = snr_pdf(&m, s).unwrap() * 2.0 * (m.s0 * s).sqrt();
            let f = gain_pdf(&d, h).unwrap();
            assert!((back - f).abs() <= 1e-12 * f);
            assert_eq!(snr_cdf(&m, s).unwrap(), gain_cdf(&d, h).unwrap());
        }
        assert_eq!(snr_pdf(&m, m.s_max * 1.01).unwrap(), 0.0);
        assert!((snr_cdf(&m, m.s_max).unwrap() - d.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn exact_ber_matches_gain_domain_integral() {
        let p = PhyParams::default();
        let (_, _, d) = setup(3.0, 3.0, 45.0, &p);
        let m = snr_model(&p, &d).unwrap();
        let q = integrate(
            |h| ber_awgn(m.s0 * h * h, ModulationOrder::QAM4) * gain_pdf(&d, h).unwrap(),
            d.h_min,
            d.h_max,
            &tight(),
        );
        let exact = ber_exact(&m, ModulationOrder::QAM4);
        assert!((exact - q.value).abs() <= 1e-8 * q.value);
    }

    #[test]
    fn ber_floor_and_saturation() {
        let p = PhyParams {
            p_opt: 5.0,
            ..PhyParams::default()
        };
        let (_, _, d) = setup(3.0, 3.0, 225.0, &p);
        let m = snr_model(&p, &d).unwrap();
        let floor = 0.5 * d.c_h;
        let exact = ber_exact(&m, ModulationOrder::QAM4);
        assert!(exact >= floor);
        let approx = ber_approx(&m, ModulationOrder::QAM4);
        assert!(((approx.value - floor) / floor).abs() < 0.05, "{approx:?}");
        assert!(((exact - floor) / floor).abs() < 0.05);

        let blocked = GainDistribution {
            c_h: 1.0,
            theta_ce: CriticalElevation::AlwaysBlocked,
            ..d
        };
        let mb = SnrModel { gain: blocked, ..m };
        assert_eq!(ber_exact(&mb, ModulationOrder::QAM16), 0.375);
    }

    #[test]
    fn never_blocked_approx_is_awgn_at_mean() {
        let p = PhyParams::default();
        let (_, _, d) = setup(3.0, 3.0, 45.0, &p);
        let m = snr_model(&p, &d).unwrap();
        let a = ber_approx(&m, ModulationOrder::QAM4);
        assert_eq!(a.value, ber_awgn(m.s0 * d.mu_h * d.mu_h, ModulationOrder::QAM4));
        assert!(!a.clamped);
    }

    #[test]
    fn optimum_tilt_values() {
        let g = link_geometry(Vec3::new(3.0, 3.0, 0.0), AP).unwrap();
        let t = optimum_tilt(&g, 45.0);
        assert!((t.theta - 64.76).abs() < 0.005 && !t.clamped);
        let away = optimum_tilt(&g, 225.0);
        assert!(away.clamped && away.theta == 0.0);
        let nadir = link_geometry(Vec3::default(), AP).unwrap();
        assert_eq!(optimum_tilt(&nadir, 10.0).theta, 0.0);
    }

    #[test]
    fn vertical_ber_is_awgn() {
        let p = PhyParams::default();
        let (c, g, _) = setup(3.0, 3.0, 45.0, &p);
        let b = ber_fixed(&c, &p, &g, 0.0, 45.0, ModulationOrder::QAM4).unwrap();
        let h = c.gain_scale(&g) * g.vertical_ratio();
        let expected = ber_awgn(snr_scale(&p).unwrap() * h * h, ModulationOrder::QAM4);
        assert!((b - expected).abs() <= 1e-14 * expected.max(1e-300));
    }
}
