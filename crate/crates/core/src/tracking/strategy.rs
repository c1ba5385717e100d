//! Choice between receiver compensation and emitter pre-compensation.

use serde::{Deserialize, Serialize};

use crate::channel::LinkConfig;
use crate::error::{Error, Result};
use crate::turbulence::{aperture_ratio, boundary_distance, Boundary, BeamGeometry, TurbulenceParams};

/// Longest path on which receiver-side compensation is considered.
pub const RECEIVER_COMPENSATION_MAX_RANGE_M: f64 = 3000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompensationStrategy {
    ReceiverCompensation,
    EmitterPreCompensation,
}

/// Why receiver compensation was ruled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedCondition {
    /// The long-term beam diameter exceeds the receiver aperture.
    BeamLargerThanAperture,
    /// The path is longer than [`RECEIVER_COMPENSATION_MAX_RANGE_M`].
    BeyondMaxRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDecision {
    pub strategy: CompensationStrategy,
    pub range_m: f64,
    pub aperture_ratio: f64,
    /// `None` when the aperture is already smaller than the launched beam.
    pub boundary: Option<Boundary>,
    pub failed: Vec<FailedCondition>,
}

/// Receiver compensation iff `range ≤ min(boundary_distance, 3000 m)`.
pub fn select_strategy(
    t: &TurbulenceParams,
    b: &BeamGeometry,
    link: &LinkConfig,
) -> Result<StrategyDecision> {
    link.validate()?;
    let d = link.rx_aperture_diameter_m;
    let ratio = aperture_ratio(t, b, link.range_m, d)?;
    let boundary = match boundary_distance(t, b, d) {
        Ok(bd) => Some(bd),
        Err(Error::NoBoundary { .. }) => None,
        Err(e) => return Err(e),
    };

    let mut failed = Vec::new();
    let inside = boundary.is_some_and(|bd| link.range_m <= bd.distance_m);
    if !inside {
        failed.push(FailedCondition::BeamLargerThanAperture);
    }
    if link.range_m > RECEIVER_COMPENSATION_MAX_RANGE_M {
        failed.push(FailedCondition::BeyondMaxRange);
    }
    let strategy = if failed.is_empty() {
        CompensationStrategy::ReceiverCompensation
    } else {
        CompensationStrategy::EmitterPreCompensation
    };
    Ok(StrategyDecision {
        strategy,
        range_m: link.range_m,
        aperture_ratio: ratio,
        boundary,
        failed,
    })
}
