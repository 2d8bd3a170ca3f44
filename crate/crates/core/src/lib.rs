//! Link-level model of an optical-wireless downlink with a randomly
//! oriented receiver: LOS gain under device rotation, orientation-induced
//! blockage, gain/SNR distributions and M-QAM DCO-OFDM error rates, plus a
//! seeded Monte-Carlo engine to check the closed forms.
//!
//! Angles are in degrees at every public interface.

pub mod channel;
pub mod error;
pub mod geometry;
pub mod linkstats;
pub mod montecarlo;
pub mod orientation;
pub mod quadrature;
pub mod scenario;

pub use channel::{channel_constants, los_gain, los_gain_full, ChannelConstants, PhyParams};
pub use error::{Error, Result};
pub use geometry::{link_geometry, EulerAngles, LinkGeometry, Mat3, Pose, Vec3};
pub use linkstats::{
    ber_approx, ber_awgn, ber_exact, gain_cdf, gain_distribution, gain_pdf, optimum_tilt, snr_cdf,
    snr_model, snr_pdf, BerApprox, GainDistribution, ModulationOrder, OptimumTilt, SnrModel,
};
pub use montecarlo::{
    ks_statistic, simulate_ber, simulate_gain, BerEstimate, EmpiricalDistribution, McConfig,
};
pub use orientation::{
    critical_elevation, omega_range, omega_range_all_theta, prob_los_blocked, theta_threshold,
    CriticalElevation, OmegaRange, StableOmegaRange, ThetaThreshold, TruncatedLaplace,
};
pub use scenario::{ElevationModel, FacingModel, OrientationModel, Scenario};
