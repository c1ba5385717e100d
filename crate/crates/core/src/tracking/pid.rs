use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub const ZERO: PidGains = PidGains {
        kp: 0.0,
        ki: 0.0,
        kd: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("pid.kp", self.kp), ("pid.ki", self.ki), ("pid.kd", self.kd)] {
            if !v.is_finite() {
                return Err(Error::domain(field, v, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        *self == PidGains::ZERO
    }
}

/// Controller memory. `hold_integrator` is set by the caller while the
/// actuator is saturated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    pub hold_integrator: bool,
}

/// The three terms of one controller update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOutput {
    pub proportional: f64,
    pub integral: f64,
    pub derivative: f64,
}

impl PidOutput {
    pub fn command(&self) -> f64 {
        self.proportional + self.integral + self.derivative
    }
}

/// Rectangular integration, backward-difference derivative.
pub fn pid_step(state: &mut PidState, gains: &PidGains, error: f64, dt: f64) -> Result<PidOutput> {
    positive("dt", dt)?;
    if !state.hold_integrator {
        state.integral += error * dt;
    }
    let out = PidOutput {
        proportional: gains.kp * error,
        integral: gains.ki * state.integral,
        derivative: gains.kd * (error - state.prev_error) / dt,
    };
    state.prev_error = error;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn proportional_only() {
        let g = PidGains {
            kp: 1.0,
            ..PidGains::ZERO
        };
        let mut s = PidState::default();
        assert_eq!(pid_step(&mut s, &g, 0.5, 1e-3).unwrap().command(), 0.5);
    }

    #[test]
    fn integral_accumulates() {
        let g = PidGains {
            ki: 1.0,
            ..PidGains::ZERO
        };
        let mut s = PidState::default();
        let mut last = None;
        for _ in 0..1000 {
            last = Some(pid_step(&mut s, &g, 1.0, 0.001).unwrap());
        }
        assert_relative_eq!(last.unwrap().integral, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn derivative_difference_quotient() {
        let g = PidGains {
            kd: 1.0,
            ..PidGains::ZERO
        };
        let mut s = PidState::default();
        pid_step(&mut s, &g, 0.0, 0.01).unwrap();
        let out = pid_step(&mut s, &g, 1.0, 0.01).unwrap();
        assert_relative_eq!(out.derivative, 100.0, max_relative = 1e-12);
    }

    #[test]
    fn held_integrator_does_not_wind_up() {
        let g = PidGains {
            ki: 1.0,
            ..PidGains::ZERO
        };
        let mut s = PidState {
            hold_integrator: true,
            ..PidState::default()
        };
        for _ in 0..10 {
            pid_step(&mut s, &g, 5.0, 0.1).unwrap();
        }
        assert_eq!(s.integral, 0.0);
    }

    #[test]
    fn bad_dt_rejected() {
        let mut s = PidState::default();
        assert!(pid_step(&mut s, &PidGains::ZERO, 1.0, 0.0).is_err());
        assert!(PidGains {
            kp: f64::NAN,
            ..PidGains::ZERO
        }
        .validate()
        .is_err());
    }
}
