//! Shared fixtures for the benchmarks.

use lifi_core::{FacingModel, OrientationModel, Scenario, Vec3, ElevationModel};

/// UE positions used across the benchmarks.
pub const LINKS: [(&str, Vec3); 3] = [
    ("near", Vec3::new(1.0, 1.0, 0.0)),
    ("reference", Vec3::new(3.0, 3.0, 0.0)),
    ("far", Vec3::new(-3.0, -3.0, 0.0)),
];

/// Reference scenario: Laplace elevation, fixed facing direction.
pub fn scenario(ue: Vec3, omega: f64) -> Scenario {
    Scenario::reference(
        ue,
        OrientationModel {
            elevation: ElevationModel::default(),
            facing: FacingModel::Fixed { omega },
        },
    )
}

/// Same link with a uniformly random facing direction.
pub fn scenario_uniform(ue: Vec3) -> Scenario {
    Scenario::reference(
        ue,
        OrientationModel {
            elevation: ElevationModel::default(),
            facing: FacingModel::Uniform,
        },
    )
}
