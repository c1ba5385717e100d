//! PSD → PID → FSM closed loop.
//!
//! Each tick the PSD reads the residual (wander minus mirror correction)
//! plus white measurement noise, the PID computes a command, and the FSM
//! executes the command computed on the previous tick (one tick of
//! processing latency). Both axes are independent and share gains.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::fsm::{advance, FsmParams, FsmState};
use super::pid::{pid_step, PidGains, PidState};
use super::wander::{generate_wander, TimeSeries2, WanderProcess};
use crate::error::{non_negative, positive, Error, Result};
use crate::exec::{self, Execution};
use crate::rng;

/// Closed-loop rms above this multiple of open-loop rms is divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingLoopConfig {
    pub pid: PidGains,
    pub loop_rate_hz: f64,
    /// PSD measurement noise, standard deviation per axis.
    pub psd_noise_rms: f64,
    pub fsm_bandwidth_hz: f64,
    pub fsm_range: f64,
    pub fsm_slew_limit: f64,
}

impl TrackingLoopConfig {
    /// Loop with gains from [`ziegler_nichols`] for the given hardware.
    pub fn tuned(loop_rate_hz: f64, psd_noise_rms: f64, fsm: FsmParams) -> Result<Self> {
        let mut c = TrackingLoopConfig {
            pid: PidGains::ZERO,
            loop_rate_hz,
            psd_noise_rms,
            fsm_bandwidth_hz: fsm.bandwidth_hz,
            fsm_range: fsm.range,
            fsm_slew_limit: fsm.slew_limit,
        };
        c.validate()?;
        let point = ultimate_point(loop_rate_hz, &fsm).ok_or_else(|| {
            Error::domain(
                "fsm_bandwidth_hz",
                fsm.bandwidth_hz,
                "loop has no phase crossover below Nyquist",
            )
        })?;
        c.pid = ziegler_nichols(point);
        Ok(c)
    }

    pub fn fsm(&self) -> FsmParams {
        FsmParams {
            bandwidth_hz: self.fsm_bandwidth_hz,
            range: self.fsm_range,
            slew_limit: self.fsm_slew_limit,
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.loop_rate_hz
    }

    pub fn validate(&self) -> Result<()> {
        self.pid.validate()?;
        positive("tracking.loop_rate_hz", self.loop_rate_hz)?;
        non_negative("tracking.psd_noise_rms", self.psd_noise_rms)?;
        self.fsm().validate()
    }
}

impl Default for TrackingLoopConfig {
    /// 10 kHz loop, 1 kHz mirror, 0.1 µm PSD noise, 1 mm travel, 1 m/s slew
    /// (focal-plane units).
    fn default() -> Self {
        TrackingLoopConfig::tuned(
            10_000.0,
            1e-7,
            FsmParams {
                bandwidth_hz: 1_000.0,
                range: 1e-3,
                slew_limit: 1.0,
            },
        )
        .expect("default loop is tunable")
    }
}

/// Gain and oscillation period at the stability limit of a P-only loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltimatePoint {
    pub gain: f64,
    pub period_s: f64,
}

/// Mirror response (including the one-tick latency) at normalized
/// frequency `omega` ∈ (0, π] rad/sample.
pub fn plant_response(loop_rate_hz: f64, fsm: &FsmParams, omega: f64) -> Complex64 {
    let (a, b) = fsm.discretize(1.0 / loop_rate_hz);
    let z = Complex64::from_polar(1.0, omega);
    // [1 0]·(zI − A)⁻¹·B via the 2×2 adjugate
    let m00 = z - a[0][0];
    let m11 = z - a[1][1];
    let det = m00 * m11 - a[0][1] * a[1][0];
    let x = (m11 * b[0] + a[0][1] * b[1]) / det;
    x / z
}

/// Phase crossover of the plant found by scanning and bisecting the
/// unwrapped phase. `None` if the phase never reaches −π.
pub fn ultimate_point(loop_rate_hz: f64, fsm: &FsmParams) -> Option<UltimatePoint> {
    const GRID: usize = 4096;
    let p = |w: f64| plant_response(loop_rate_hz, fsm, w);
    let mut w_prev = PI * 1e-6;
    let mut p_prev = p(w_prev);
    let mut phase = p_prev.arg();
    for i in 1..=GRID {
        let w = PI * i as f64 / GRID as f64;
        let pw = p(w);
        let next = phase + (pw / p_prev).arg();
        if next <= -PI {
            // bisect on the phase relative to the left grid point
            let (mut lo, mut hi) = (w_prev, w);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if phase + (p(mid) / p_prev).arg() > -PI {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let w_u = 0.5 * (lo + hi);
            return Some(UltimatePoint {
                gain: 1.0 / p(w_u).norm(),
                period_s: 2.0 * PI / (w_u * loop_rate_hz),
            });
        }
        phase = next;
        w_prev = w;
        p_prev = pw;
    }
    None
}

/// Ziegler-Nichols "no overshoot" PID rule:
/// Kp = 0.2·Ku, Ti = Tu/2, Td = Tu/3.
pub fn ziegler_nichols(u: UltimatePoint) -> PidGains {
    let kp = 0.2 * u.gain;
    PidGains {
        kp,
        ki: kp / (0.5 * u.period_s),
        kd: kp * u.period_s / 3.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopResult {
    /// Open-loop disturbance sampled at the loop ticks.
    pub wander: TimeSeries2,
    pub residual_series: TimeSeries2,
    /// Radial rms of the residual.
    pub rms_residual: f64,
    pub open_loop_rms: f64,
    pub rejection_db: f64,
    pub saturation_fraction: f64,
    pub diverged: bool,
    pub config: TrackingLoopConfig,
    pub process: WanderProcess,
}

impl LoopResult {
    fn finish(
        wander: TimeSeries2,
        residual_series: TimeSeries2,
        saturated_ticks: usize,
        config: TrackingLoopConfig,
        process: WanderProcess,
    ) -> Self {
        let open_loop_rms = wander.radial_rms();
        let rms_residual = residual_series.radial_rms();
        let rejection_db = if open_loop_rms == rms_residual {
            0.0
        } else {
            20.0 * (open_loop_rms / rms_residual).log10()
        };
        let n = residual_series.len().max(1);
        LoopResult {
            saturation_fraction: saturated_ticks as f64 / n as f64,
            diverged: !rms_residual.is_finite() || rms_residual > DIVERGENCE_FACTOR * open_loop_rms,
            wander,
            residual_series,
            rms_residual,
            open_loop_rms,
            rejection_db,
            config,
            process,
        }
    }
}

/// Generates the wander for `w` and closes the loop on it.
pub fn closed_loop_sim(w: &WanderProcess, c: &TrackingLoopConfig) -> Result<LoopResult> {
    let wander = generate_wander(w)?;
    run_loop(&wander, w, c)
}

/// Closes the loop on an existing wander series sampled at
/// `w.sample_rate_hz`. PSD noise is keyed by `w.seed`.
pub fn run_loop(wander: &TimeSeries2, w: &WanderProcess, c: &TrackingLoopConfig) -> Result<LoopResult> {
    c.validate()?;
    if c.loop_rate_hz > wander.sample_rate_hz {
        return Err(Error::domain(
            "tracking.loop_rate_hz",
            c.loop_rate_hz,
            "must not exceed the wander sample rate",
        ));
    }
    if wander.is_empty() {
        return Err(Error::Shape("empty wander series".into()));
    }
    let dt = c.dt();
    let duration = wander.len() as f64 / wander.sample_rate_hz;
    let ticks = ((duration * c.loop_rate_hz).floor() as usize).max(1);
    let fsm = c.fsm();
    let (a, b) = fsm.discretize(dt);
    let ratio = wander.sample_rate_hz / c.loop_rate_hz;
    let last = wander.len() - 1;

    let mut open = TimeSeries2::zeros(c.loop_rate_hz, ticks);
    let mut resid = TimeSeries2::zeros(c.loop_rate_hz, ticks);
    let mut sat = vec![false; ticks];

    for axis in 0..2 {
        let (src, open_out, res_out) = if axis == 0 {
            (&wander.x, &mut open.x, &mut resid.x)
        } else {
            (&wander.y, &mut open.y, &mut resid.y)
        };
        let mut noise_rng = rng::stream(w.seed, "psd-noise", axis as u64);
        let mut pid = PidState::default();
        let mut mirror = FsmState::default();
        let mut pending = 0.0;
        for k in 0..ticks {
            let d = src[((k as f64 * ratio) as usize).min(last)];
            let r = d - mirror.position;
            open_out[k] = d;
            res_out[k] = r;
            let noise: f64 = noise_rng.sample(StandardNormal);
            let measured = r + c.psd_noise_rms * noise;
            let command = pid_step(&mut pid, &c.pid, measured, dt)?.command();
            let (_, limits) = advance(&mut mirror, &fsm, &a, &b, pending, dt);
            pending = command;
            pid.hold_integrator = limits.any();
            sat[k] |= limits.any();
        }
    }

    let saturated = sat.iter().filter(|&&s| s).count();
    Ok(LoopResult::finish(open, resid, saturated, *c, *w))
}

/// Emitter pre-compensation: the correction is derived from the backward
/// tracking beam, whose wander decorrelates from the forward path over the
/// round trip as exp(−delay / coherence_time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreCompensation {
    pub round_trip_delay_s: f64,
    pub coherence_time_s: f64,
}

impl PreCompensation {
    /// Delay 2L/c plus a fixed processing latency.
    pub fn for_range(range_m: f64, processing_latency_s: f64, coherence_time_s: f64) -> Self {
        PreCompensation {
            round_trip_delay_s: 2.0 * range_m / crate::channel::SPEED_OF_LIGHT + processing_latency_s,
            coherence_time_s,
        }
    }

    pub fn correlation(&self) -> f64 {
        (-self.round_trip_delay_s / self.coherence_time_s).exp()
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("precompensation.round_trip_delay_s", self.round_trip_delay_s)?;
        positive("precompensation.coherence_time_s", self.coherence_time_s)?;
        Ok(())
    }
}

/// Receiver-style loop on the backward beam, with the correction applied
/// to a forward disturbance ρ·w + √(1 − ρ²)·w′ (w′ independent, same
/// statistics).
pub fn closed_loop_sim_precompensated(
    w: &WanderProcess,
    c: &TrackingLoopConfig,
    pre: &PreCompensation,
) -> Result<LoopResult> {
    pre.validate()?;
    let backward = generate_wander(w)?;
    let independent = generate_wander(&WanderProcess {
        seed: rng::derive_u64(w.seed, "decorrelated", 0),
        ..*w
    })?;
    let inner = run_loop(&backward, w, c)?;

    let rho = pre.correlation();
    let s = (1.0 - rho * rho).sqrt();
    let ratio = backward.sample_rate_hz / c.loop_rate_hz;
    let last = backward.len() - 1;
    let n = inner.residual_series.len();
    let mut forward = TimeSeries2::zeros(c.loop_rate_hz, n);
    let mut resid = TimeSeries2::zeros(c.loop_rate_hz, n);
    for k in 0..n {
        let i = ((k as f64 * ratio) as usize).min(last);
        for (fw, res, back_res, back, ind) in [
            (&mut forward.x, &mut resid.x, &inner.residual_series.x, &inner.wander.x, &independent.x),
            (&mut forward.y, &mut resid.y, &inner.residual_series.y, &inner.wander.y, &independent.y),
        ] {
            let correction = back[k] - back_res[k];
            let f = rho * back[k] + s * ind[i];
            fw[k] = f;
            res[k] = f - correction;
        }
    }
    let saturated = (inner.saturation_fraction * n as f64).round() as usize;
    Ok(LoopResult::finish(forward, resid, saturated, *c, *w))
}

/// Independent loop runs over `seeds`, in seed order.
pub fn seed_sweep(
    w: &WanderProcess,
    c: &TrackingLoopConfig,
    seeds: &[u64],
    exec: Execution,
) -> Vec<Result<LoopResult>> {
    exec::map_slice(exec, seeds, |&seed| {
        closed_loop_sim(&WanderProcess { seed, ..*w }, c)
    })
}
