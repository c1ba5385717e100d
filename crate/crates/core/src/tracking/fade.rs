use serde::{Deserialize, Serialize};

use super::wander::TimeSeries2;
use crate::error::{positive, Error, Result};

/// Per-slot pass/fade flags for the protocol Monte Carlo.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FadeMask {
    /// `true` where the signal reaches the detector.
    pub pass: Vec<bool>,
}

impl FadeMask {
    pub fn all_pass(n_slots: usize) -> Self {
        FadeMask {
            pass: vec![true; n_slots],
        }
    }

    /// Fraction of passing slots; 1 for an empty mask.
    pub fn availability(&self) -> f64 {
        if self.pass.is_empty() {
            return 1.0;
        }
        self.pass.iter().filter(|&&p| p).count() as f64 / self.pass.len() as f64
    }
}

/// Marks slot `j` (at time j / `slot_rate_hz`) faded when the residual at
/// the last loop tick before it lies outside `capture_radius`.
pub fn residual_to_fade_mask(
    residual: &TimeSeries2,
    capture_radius: f64,
    slot_rate_hz: f64,
    n_slots: usize,
) -> Result<FadeMask> {
    positive("capture_radius", capture_radius)?;
    positive("slot_rate_hz", slot_rate_hz)?;
    if residual.is_empty() {
        return Err(Error::Shape("empty residual series".into()));
    }
    let r2 = capture_radius * capture_radius;
    let outside: Vec<bool> = residual
        .x
        .iter()
        .zip(&residual.y)
        .map(|(x, y)| x * x + y * y > r2)
        .collect();
    let ticks_per_slot = residual.sample_rate_hz / slot_rate_hz;
    let last = outside.len() - 1;
    let pass = (0..n_slots)
        .map(|j| !outside[((j as f64 * ticks_per_slot) as usize).min(last)])
        .collect();
    Ok(FadeMask { pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracking::wander::{generate_wander, WanderProcess};
    use crate::turbulence::rayleigh_tail;

    #[test]
    fn zero_residual_passes() {
        let r = TimeSeries2::zeros(1000.0, 100);
        let m = residual_to_fade_mask(&r, 1e-5, 1e6, 10_000).unwrap();
        assert_eq!(m.pass.len(), 10_000);
        assert_eq!(m.availability(), 1.0);
    }

    #[test]
    fn constant_offset_fades_everything() {
        let mut r = TimeSeries2::zeros(1000.0, 100);
        r.x.iter_mut().for_each(|v| *v = 2.0);
        let m = residual_to_fade_mask(&r, 1.0, 1e6, 5000).unwrap();
        assert_eq!(m.availability(), 0.0);
    }

    #[test]
    fn zero_order_hold_between_ticks() {
        let r = TimeSeries2 {
            sample_rate_hz: 10.0,
            x: vec![0.0, 5.0, 0.0],
            y: vec![0.0; 3],
        };
        // 40 slots/s: four slots per tick
        let m = residual_to_fade_mask(&r, 1.0, 40.0, 14).unwrap();
        let expected: Vec<bool> = (0..14).map(|j| !(4..8).contains(&j)).collect();
        assert_eq!(m.pass, expected);
    }

    #[test]
    fn gaussian_residual_matches_rayleigh_tail() {
        let sigma = 1.0;
        let w = WanderProcess {
            rms: sigma,
            bandwidth_hz: 100.0,
            sample_rate_hz: 1000.0,
            duration_s: 1000.0,
            seed: 8,
        };
        let s = generate_wander(&w).unwrap();
        let a = 1.5;
        let m = residual_to_fade_mask(&s, a, 1000.0, s.len()).unwrap();
        let expected = 1.0 - rayleigh_tail(a, 2.0 * sigma * sigma);
        // correlated samples: ~3e5 effective draws, p ≈ 0.32 → σ ≈ 1e-3
        assert!((m.availability() - expected).abs() < 5e-3);
    }

    #[test]
    fn invalid_radius_rejected() {
        let r = TimeSeries2::zeros(1000.0, 10);
        assert!(residual_to_fade_mask(&r, 0.0, 1e6, 10).is_err());
    }
}
