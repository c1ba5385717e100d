use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::rng;

/// Two-axis series sampled at a fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries2 {
    pub sample_rate_hz: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TimeSeries2 {
    pub fn zeros(sample_rate_hz: f64, n: usize) -> Self {
        TimeSeries2 {
            sample_rate_hz,
            x: vec![0.0; n],
            y: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate_hz
    }

    /// √(mean(x² + y²)).
    pub fn radial_rms(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.x.iter().zip(&self.y).map(|(x, y)| x * x + y * y).sum();
        (sum / self.len() as f64).sqrt()
    }
}

/// First-order Gauss-Markov wander, independent per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WanderProcess {
    /// Stationary standard deviation per axis.
    pub rms: f64,
    /// 3 dB corner of the process spectrum.
    pub bandwidth_hz: f64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl WanderProcess {
    pub fn validate(&self) -> Result<()> {
        non_negative("wander.rms", self.rms)?;
        positive("wander.bandwidth_hz", self.bandwidth_hz)?;
        positive("wander.sample_rate_hz", self.sample_rate_hz)?;
        positive("wander.duration_s", self.duration_s)?;
        if self.sample_rate_hz < 10.0 * self.bandwidth_hz {
            return Err(Error::domain(
                "wander.sample_rate_hz",
                self.sample_rate_hz,
                "must be at least 10x the wander bandwidth",
            ));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        ((self.duration_s * self.sample_rate_hz).round() as usize).max(1)
    }

    /// One-step correlation exp(−2π·f_c·Δt).
    pub fn pole(&self) -> f64 {
        (-2.0 * PI * self.bandwidth_hz / self.sample_rate_hz).exp()
    }
}

/// AR(1) recursion x[k+1] = a·x[k] + σ·√(1 − a²)·ξ, started from the
/// stationary distribution, so every sample has variance σ².
pub fn generate_wander(p: &WanderProcess) -> Result<TimeSeries2> {
    p.validate()?;
    let n = p.samples();
    if p.rms == 0.0 {
        return Ok(TimeSeries2::zeros(p.sample_rate_hz, n));
    }
    let a = p.pole();
    let drive = p.rms * (1.0 - a * a).sqrt();
    let axis = |label: &str| {
        let mut rng = rng::stream(p.seed, label, 0);
        let mut out = Vec::with_capacity(n);
        let mut v = p.rms * rng.sample::<f64, _>(StandardNormal);
        out.push(v);
        for _ in 1..n {
            v = a * v + drive * rng.sample::<f64, _>(StandardNormal);
            out.push(v);
        }
        out
    };
    Ok(TimeSeries2 {
        sample_rate_hz: p.sample_rate_hz,
        x: axis("wander-x"),
        y: axis("wander-y"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn process(rms: f64) -> WanderProcess {
        WanderProcess {
            rms,
            bandwidth_hz: 100.0,
            sample_rate_hz: 1000.0,
            duration_s: 1000.0,
            seed: 17,
        }
    }

    #[test]
    fn zero_rms_is_zero() {
        let s = generate_wander(&WanderProcess {
            duration_s: 1.0,
            ..process(0.0)
        })
        .unwrap();
        assert_eq!(s.len(), 1000);
        assert!(s.x.iter().chain(&s.y).all(|&v| v == 0.0));
    }

    #[test]
    fn stationary_std_within_one_percent() {
        let s = generate_wander(&process(2e-6)).unwrap();
        assert_eq!(s.len(), 1_000_000);
        for axis in [&s.x, &s.y] {
            let n = axis.len() as f64;
            let mean = axis.iter().sum::<f64>() / n;
            let var = axis.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            assert!((var.sqrt() / 2e-6 - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn autocorrelation_decays_to_inverse_e() {
        // lag τ = 1/(2π f_c) is 1.5915 samples at 1 kHz / 100 Hz; use a
        // faster sample rate so the lag lands on an integer: 62.83 kHz.
        let p = WanderProcess {
            rms: 1.0,
            bandwidth_hz: 100.0,
            sample_rate_hz: 2.0 * PI * 100.0 * 10.0,
            duration_s: 200.0,
            seed: 3,
        };
        let s = generate_wander(&p).unwrap();
        let lag = 10;
        let x = &s.x;
        let n = x.len() - lag;
        let c0 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let cl = (0..n).map(|i| x[i] * x[i + lag]).sum::<f64>() / n as f64;
        let ratio = cl / c0;
        assert!((ratio / (-1.0f64).exp() - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn deterministic_per_seed() {
        let p = WanderProcess {
            duration_s: 0.5,
            ..process(1.0)
        };
        assert_eq!(generate_wander(&p).unwrap(), generate_wander(&p).unwrap());
        let q = WanderProcess { seed: 18, ..p };
        assert_ne!(generate_wander(&p).unwrap(), generate_wander(&q).unwrap());
    }

    #[test]
    fn undersampled_process_rejected() {
        let p = WanderProcess {
            sample_rate_hz: 999.0,
            ..process(1.0)
        };
        assert!(generate_wander(&p).is_err());
    }
}
