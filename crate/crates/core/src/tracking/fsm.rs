//! Fast-steering mirror: critically damped second-order axis followed by a
//! slew-rate limit and a travel clamp.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsmParams {
    /// Natural frequency of the axis, Hz.
    pub bandwidth_hz: f64,
    /// Travel limit, |position| ≤ range.
    pub range: f64,
    /// Maximum rate of change of position, per second.
    pub slew_limit: f64,
}

impl FsmParams {
    pub fn validate(&self) -> Result<()> {
        positive("fsm_bandwidth_hz", self.bandwidth_hz)?;
        for (field, v) in [("fsm_range", self.range), ("fsm_slew_limit", self.slew_limit)] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::domain(field, v, "must be positive"));
            }
        }
        Ok(())
    }

    pub fn natural_frequency(&self) -> f64 {
        2.0 * PI * self.bandwidth_hz
    }

    /// Exact zero-order-hold transition `(A, B)` over `dt` for the state
    /// `[position, velocity]` driven by a constant command.
    pub fn discretize(&self, dt: f64) -> ([[f64; 2]; 2], [f64; 2]) {
        let w = self.natural_frequency();
        let e = (-w * dt).exp();
        let a = [
            [e * (1.0 + w * dt), e * dt],
            [-w * w * dt * e, e * (1.0 - w * dt)],
        ];
        let b = [1.0 - e * (1.0 + w * dt), w * w * dt * e];
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FsmState {
    pub position: f64,
    pub velocity: f64,
}

/// Whether a limit engaged during the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FsmLimits {
    pub slew: bool,
    pub range: bool,
}

impl FsmLimits {
    pub fn any(&self) -> bool {
        self.slew || self.range
    }
}

/// Advances one axis by `dt` toward `command` and returns the new position.
pub fn fsm_step(
    state: &mut FsmState,
    params: &FsmParams,
    command: f64,
    dt: f64,
) -> Result<(f64, FsmLimits)> {
    positive("dt", dt)?;
    let (a, b) = params.discretize(dt);
    Ok(advance(state, params, &a, &b, command, dt))
}

/// Step with a precomputed transition.
pub(crate) fn advance(
    state: &mut FsmState,
    params: &FsmParams,
    a: &[[f64; 2]; 2],
    b: &[f64; 2],
    command: f64,
    dt: f64,
) -> (f64, FsmLimits) {
    let old = state.position;
    let mut pos = a[0][0] * old + a[0][1] * state.velocity + b[0] * command;
    let mut vel = a[1][0] * old + a[1][1] * state.velocity + b[1] * command;
    let mut limits = FsmLimits::default();

    let max_move = params.slew_limit * dt;
    if (pos - old).abs() > max_move {
        pos = old + max_move.copysign(pos - old);
        vel = params.slew_limit.copysign(vel);
        limits.slew = true;
    }
    if pos.abs() > params.range {
        pos = params.range.copysign(pos);
        vel = 0.0;
        limits.range = true;
    }
    state.position = pos;
    state.velocity = vel;
    (pos, limits)
}
