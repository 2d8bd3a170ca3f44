//! Seeded Monte-Carlo sampling of orientations.
//!
//! Sample `i` always reads the ChaCha8 key stream at word offset `4i` (two
//! `u64` draws: elevation then facing), so results do not depend on how the
//! index range is split across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{gain_from_cos, ChannelConstants};
use crate::error::{Error, Result};
use crate::geometry::{cos_incidence, LinkGeometry};
use crate::linkstats::{ber_awgn, snr_scale, ModulationOrder};
use crate::orientation::{omega_range, visible_elevations, TruncatedLaplace};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::scenario::{ElevationModel, FacingModel, Scenario};

const WORDS_PER_SAMPLE: u128 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub n_bins: usize,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 1_000_000,
            seed: 1,
            n_bins: 100,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        if self.n_bins < 10 {
            return Err(Error::InvalidParameter(format!(
                "n_bins must be at least 10, got {}",
                self.n_bins
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Draws `(θ, Ω)` pairs for a scenario.
#[derive(Debug, Clone, Copy)]
struct OrientationSampler {
    elevation: Elevation,
    facing: FacingModel,
}

#[derive(Debug, Clone, Copy)]
enum Elevation {
    Fixed(f64),
    Law(TruncatedLaplace),
}

impl OrientationSampler {
    fn new(s: &Scenario) -> Result<Self> {
        let elevation = match (s.orientation.elevation, s.orientation.elevation.law()?) {
            (_, Some(law)) => Elevation::Law(law),
            (ElevationModel::Fixed { theta }, None) => Elevation::Fixed(theta),
            (ElevationModel::Laplace { .. }, None) => unreachable!("law() returns Some"),
        };
        Ok(Self {
            elevation,
            facing: s.orientation.facing,
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let u_theta: f64 = rng.random();
        let u_omega: f64 = rng.random();
        let theta = match self.elevation {
            Elevation::Fixed(t) => t,
            Elevation::Law(law) => law.quantile(u_theta),
        };
        let omega = match self.facing {
            FacingModel::Fixed { omega } => omega,
            FacingModel::Uniform => 360.0 * u_omega,
        };
        (theta, omega)
    }
}

/// Splits `0..n` into `workers` contiguous ranges and maps each sample
/// index through `f`, returning per-worker results in index order.
fn run_chunks<T, F>(cfg: &McConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64, u64) -> T + Sync,
{
    let n = cfg.n_samples;
    let w = (cfg.workers as u64).clamp(1, n);
    let bounds: Vec<(u64, u64)> = (0..w).map(|i| (n * i / w, n * (i + 1) / w)).collect();
    let job = |(start, end): (u64, u64)| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_word_pos(u128::from(start) * WORDS_PER_SAMPLE);
        f(&mut rng, start, end)
    };
    if w == 1 {
        return vec![job(bounds[0])];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = bounds.iter().map(|&b| scope.spawn(move || job(b))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling worker panicked"))
            .collect()
    })
}

/// Histogram plus ECDF of the nonzero samples and the count of exact zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub edges: Vec<f64>,
    /// Histogram of the nonzero samples; `counts.sum() + zeros == n`.
    pub counts: Vec<u64>,
    pub zeros: u64,
    pub n: u64,
    #[serde(skip)]
    positives: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Builds from raw samples. Values outside `range` land in the end bins.
    pub fn from_samples(samples: Vec<f64>, n_bins: usize, range: Option<(f64, f64)>) -> Self {
        let n = samples.len() as u64;
        let mut positives: Vec<f64> = samples.into_iter().filter(|&x| x > 0.0).collect();
        positives.sort_by(f64::total_cmp);
        let zeros = n - positives.len() as u64;
        let (lo, hi) = match range {
            Some(r) if r.1 > r.0 => r,
            _ => match (positives.first(), positives.last()) {
                (Some(&a), Some(&b)) if b > a => (a, b),
                (Some(&a), Some(_)) => (a * (1.0 - 1e-9), a * (1.0 + 1e-9)),
                _ => (0.0, 1.0),
            },
        };
        let width = (hi - lo) / n_bins as f64;
        let edges = (0..=n_bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; n_bins];
        for &x in &positives {
            let k = ((x - lo) / width).floor();
            let idx = if k < 0.0 { 0 } else { (k as usize).min(n_bins - 1) };
            counts[idx] += 1;
        }
        Self {
            edges,
            counts,
            zeros,
            n,
            positives,
        }
    }

    pub fn point_mass_at_zero(&self) -> f64 {
        self.zeros as f64 / self.n as f64
    }

    /// Sorted nonzero samples.
    pub fn positives(&self) -> &[f64] {
        &self.positives
    }

    /// ECDF over all samples, zeros included.
    pub fn ecdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let below = self.positives.partition_point(|&v| v <= x) as u64;
        (self.zeros + below) as f64 / self.n as f64
    }

    /// ECDF of the nonzero samples.
    pub fn conditional_ecdf(&self, x: f64) -> f64 {
        if self.positives.is_empty() {
            return 0.0;
        }
        self.positives.partition_point(|&v| v <= x) as f64 / self.positives.len() as f64
    }

    /// Applies an increasing map to every nonzero sample (e.g. gain → SNR).
    pub fn map_increasing(&self, f: impl Fn(f64) -> f64, range: Option<(f64, f64)>) -> Self {
        let mut samples: Vec<f64> = self.positives.iter().map(|&x| f(x)).collect();
        samples.resize(self.n as usize, 0.0);
        Self::from_samples(samples, self.counts.len(), range)
    }
}

/// Samples `(θ, Ω)` and records the LOS gain.
pub fn simulate_gain(scenario: &Scenario, cfg: &McConfig) -> Result<EmpiricalDistribution> {
    cfg.validate()?;
    scenario.validate()?;
    let g = scenario.geometry()?;
    let c = scenario.constants()?;
    let sampler = OrientationSampler::new(scenario)?;
    let fov = scenario.phy.fov;
    let parts = run_chunks(cfg, |rng, start, end| {
        let mut out = Vec::with_capacity((end - start) as usize);
        for _ in start..end {
            let (theta, omega) = sampler.draw(rng);
            out.push(sample_gain(&c, &g, theta, omega, fov));
        }
        out
    });
    let samples: Vec<f64> = parts.into_iter().flatten().collect();
    let range = scenario
        .gain_distribution()
        .ok()
        .filter(|d| !d.always_blocked())
        .map(|d| (d.h_min, d.h_max));
    Ok(EmpiricalDistribution::from_samples(samples, cfg.n_bins, range))
}

fn sample_gain(c: &ChannelConstants, g: &LinkGeometry, theta: f64, omega: f64, fov: f64) -> f64 {
    let cos_psi = cos_incidence(g, theta, omega).expect("sampled θ lies in [0, 90]");
    gain_from_cos(c, g, cos_psi, fov)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }
}

/// Mean of `P_e(S0 H²)` over sampled orientations; blocked samples count
/// as `c_M/2`.
pub fn simulate_ber(
    scenario: &Scenario,
    modulation: ModulationOrder,
    cfg: &McConfig,
) -> Result<BerEstimate> {
    cfg.validate()?;
    scenario.validate()?;
    let g = scenario.geometry()?;
    let c = scenario.constants()?;
    let s0 = snr_scale(&scenario.phy)?;
    let sampler = OrientationSampler::new(scenario)?;
    let fov = scenario.phy.fov;
    let parts = run_chunks(cfg, |rng, start, end| {
        let mut acc = Moments::default();
        for _ in start..end {
            let (theta, omega) = sampler.draw(rng);
            let h = sample_gain(&c, &g, theta, omega, fov);
            acc.push(ber_awgn(s0 * h * h, modulation));
        }
        acc
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if m.n > 1 { m.m2 / (m.n - 1) as f64 } else { 0.0 };
    Ok(BerEstimate {
        mean: m.mean,
        std_err: (var / m.n as f64).sqrt(),
        n: m.n,
    })
}

/// One-sample KS distance between the nonzero samples and `cdf`, which must
/// be the analytic CDF conditioned on a nonzero value.
pub fn ks_statistic(emp: &EmpiricalDistribution, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if emp.n < 100 {
        return Err(Error::TooFewSamples(emp.n as usize));
    }
    let xs = emp.positives();
    if xs.is_empty() {
        return Err(Error::NoContinuousSamples);
    }
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample KS distance between sorted slices.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Orientation-averaged BER of the scenario by direct quadrature over the
/// elevation law and/or the uniform facing direction, using the exact
/// geometry. This is the value `simulate_ber` converges to.
pub fn ber_orientation_average(scenario: &Scenario, modulation: ModulationOrder) -> Result<f64> {
    scenario.validate()?;
    let g = scenario.geometry()?;
    let c = scenario.constants()?;
    let s0 = snr_scale(&scenario.phy)?;
    let fov = scenario.phy.fov;
    let law = scenario.orientation.elevation.law()?;
    let tol = Tolerance {
        abs: 1e-18,
        rel: 1e-9,
        max_subdivisions: 10_000,
    };
    let ber_at = |theta: f64, omega: f64| {
        let h = sample_gain(&c, &g, theta, omega, fov);
        ber_awgn(s0 * h * h, modulation)
    };
    let over_theta = |omega: f64, law: &TruncatedLaplace| {
        let mut breaks = vec![0.0, 90.0, law.mu.clamp(0.0, 90.0)];
        if let Some(w) = visible_elevations(&g, omega, fov) {
            breaks.extend([w.lo, w.hi]);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        integrate_with_breaks(|t| ber_at(t, omega) * law.pdf(t), &breaks, &tol).value
    };
    let over_omega = |inner: &dyn Fn(f64) -> f64, theta_hint: Option<f64>| {
        let mut breaks = vec![0.0, 360.0];
        for extra in [g.bearing, (g.bearing + 180.0) % 360.0] {
            breaks.push(extra);
        }
        if let Some(t) = theta_hint {
            if let Some((a, b)) = omega_range(&g, t, fov).ok().and_then(|r| r.endpoints()) {
                breaks.extend([a, b]);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        integrate_with_breaks(inner, &breaks, &tol).value / 360.0
    };
    Ok(match (law, scenario.orientation.elevation, scenario.orientation.facing) {
        (None, ElevationModel::Fixed { theta }, FacingModel::Fixed { omega }) => ber_at(theta, omega),
        (None, ElevationModel::Fixed { theta }, FacingModel::Uniform) => {
            over_omega(&|om| ber_at(theta, om), Some(theta))
        }
        (Some(law), _, FacingModel::Fixed { omega }) => over_theta(omega, &law),
        (Some(law), _, FacingModel::Uniform) => over_omega(&|om| over_theta(om, &law), None),
        (None, ElevationModel::Laplace { .. }, _) => unreachable!("law() returns Some"),
    })
}
