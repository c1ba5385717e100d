//! End-to-end scenarios: turbulence statistics → link budget → pointing
//! fades (optionally tracked) → protocol Monte Carlo.
//!
//! Every random stream is derived from `master_seed` by label, so a
//! [`SimResult::config_echo`] re-runs to the identical result under any
//! execution policy.

mod sweep;

use serde::{Deserialize, Serialize};

use crate::b92::{self, DetectorModel, PulseSource, Transmission, TransmissionStats};
use crate::channel::{background_count_rate, total_transmittance, BackgroundEnvironment, LinkConfig};
use crate::error::{positive, Error, Result};
use crate::exec::Execution;
use crate::rng;
use crate::tracking::{
    closed_loop_sim_precompensated, generate_wander, residual_to_fade_mask, run_loop,
    select_strategy, CompensationStrategy, LoopResult, PreCompensation, StrategyDecision,
    TrackingLoopConfig, WanderProcess,
};
use crate::turbulence::{TurbulenceParams, TurbulenceStats};

pub use sweep::{analytic_sweep, sweep, AnalyticRow, SweepRow, PARAMETER_PATHS};

/// Plane at which pointing error is compared with a capture radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadeReference {
    /// Angle of arrival × focal length against the fiber core radius.
    #[default]
    FocalPlane,
    /// Beam-centroid wander against the telescope aperture radius.
    ReceiverAperture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadeModel {
    pub reference: FadeReference,
    /// Temporal bandwidth of the pointing disturbance.
    pub wander_bandwidth_hz: f64,
    pub wander_sample_rate_hz: f64,
}

impl Default for FadeModel {
    fn default() -> Self {
        FadeModel {
            reference: FadeReference::FocalPlane,
            wander_bandwidth_hz: 100.0,
            wander_sample_rate_hz: 10_000.0,
        }
    }
}

/// Closed-loop tracking plus the parameters used when the selector falls
/// back to emitter pre-compensation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingSetup {
    #[serde(rename = "loop")]
    pub loop_config: TrackingLoopConfig,
    pub processing_latency_s: f64,
    pub coherence_time_s: f64,
}

impl Default for TrackingSetup {
    fn default() -> Self {
        TrackingSetup {
            loop_config: TrackingLoopConfig::default(),
            processing_latency_s: 1e-4,
            coherence_time_s: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub link: LinkConfig,
    pub turbulence: TurbulenceParams,
    pub source: PulseSource,
    pub detector: DetectorModel,
    pub background: BackgroundEnvironment,
    /// `None`: no tracking.
    pub tracking: Option<TrackingSetup>,
    pub fade: FadeModel,
    /// Span of link time covered by the slot window.
    pub duration_s: f64,
    /// Slots simulated by the protocol Monte Carlo.
    pub slots: u64,
    pub master_seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            link: LinkConfig::default(),
            turbulence: TurbulenceParams::default(),
            source: PulseSource::default(),
            detector: DetectorModel::default(),
            background: BackgroundEnvironment::default(),
            tracking: None,
            fade: FadeModel::default(),
            duration_s: 1.0,
            slots: 10_000_000,
            master_seed: 1,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.turbulence.validate()?;
        self.source.validate()?;
        self.detector.validate()?;
        self.background.validate()?;
        positive("duration_s", self.duration_s)?;
        if self.slots == 0 {
            return Err(Error::domain("slots", 0.0, "must be positive"));
        }
        positive("fade.wander_bandwidth_hz", self.fade.wander_bandwidth_hz)?;
        positive("fade.wander_sample_rate_hz", self.fade.wander_sample_rate_hz)?;
        if let Some(t) = &self.tracking {
            t.loop_config.validate()?;
            positive("tracking.coherence_time_s", t.coherence_time_s)?;
            crate::error::non_negative("tracking.processing_latency_s", t.processing_latency_s)?;
        }
        Ok(())
    }
}

/// Modeling assumptions that qualify a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionFlag {
    /// Receiver focal length, optics throughput and detector figures are
    /// configured assumptions, not measured values.
    AssumedReceiverHardware,
    /// Key rate uses a 1.2-efficiency entropy penalty, not a full
    /// post-processing stack.
    KeyRateEntropyBound,
    /// Window rates are scaled to per-second figures at the source clock.
    RateExtrapolatedFromWindow,
    /// σ_R² > 1: weak-fluctuation formulas used outside their range.
    StrongFluctuation,
    /// Pre-compensation simulated as a decorrelated receiver loop.
    PreCompensationApproximation,
    /// Synchronization channel treated as a perfect clock.
    PerfectTiming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub stats: TransmissionStats,
    pub availability: f64,
    pub transmittance: f64,
    pub loop_result: Option<LoopResult>,
    pub strategy: Option<StrategyDecision>,
    pub derived_turbulence: TurbulenceStats,
    pub config_echo: Scenario,
    pub assumption_flags: Vec<AssumptionFlag>,
}

pub fn run_scenario(s: &Scenario) -> Result<SimResult> {
    run_scenario_with(s, Execution::default())
}

pub fn run_scenario_with(s: &Scenario, exec: Execution) -> Result<SimResult> {
    s.validate().map_err(|e| e.with_context("invalid scenario"))?;
    let link = &s.link;
    let stats = TurbulenceStats::compute(&s.turbulence, &link.tx_beam, link.range_m, link.rx_aperture_diameter_m)
        .map_err(|e| e.with_context("turbulence statistics"))?;
    let transmittance =
        total_transmittance(link, stats.w_lt).map_err(|e| e.with_context("link budget"))?;
    let background = background_count_rate(link, &s.background, s.detector.efficiency)
        .map_err(|e| e.with_context("background rate"))?;

    let mut flags = vec![
        AssumptionFlag::AssumedReceiverHardware,
        AssumptionFlag::KeyRateEntropyBound,
        AssumptionFlag::RateExtrapolatedFromWindow,
        AssumptionFlag::PerfectTiming,
    ];
    if stats.strong_fluctuation {
        flags.push(AssumptionFlag::StrongFluctuation);
    }

    let (rms, capture) = match s.fade.reference {
        FadeReference::FocalPlane => (
            link.focal_length_m * (0.5 * stats.aoa_var).sqrt(),
            0.5 * link.fiber_core_diameter_m,
        ),
        FadeReference::ReceiverAperture => ((0.5 * stats.wander_var).sqrt(), link.rx_aperture_radius()),
    };
    let sample_rate = match &s.tracking {
        Some(t) => s.fade.wander_sample_rate_hz.max(t.loop_config.loop_rate_hz),
        None => s.fade.wander_sample_rate_hz,
    };
    let process = WanderProcess {
        rms,
        bandwidth_hz: s.fade.wander_bandwidth_hz,
        sample_rate_hz: sample_rate,
        duration_s: s.duration_s,
        seed: rng::derive_u64(s.master_seed, "wander", 0),
    };

    let (residual, loop_result, strategy) = match &s.tracking {
        None => {
            let w = generate_wander(&process).map_err(|e| e.with_context("pointing disturbance"))?;
            (w, None, None)
        }
        Some(t) => {
            let decision = select_strategy(&s.turbulence, &link.tx_beam, link)
                .map_err(|e| e.with_context("strategy selection"))?;
            let result = match decision.strategy {
                CompensationStrategy::ReceiverCompensation => {
                    let w = generate_wander(&process)
                        .map_err(|e| e.with_context("pointing disturbance"))?;
                    run_loop(&w, &process, &t.loop_config)
                }
                CompensationStrategy::EmitterPreCompensation => {
                    flags.push(AssumptionFlag::PreCompensationApproximation);
                    let pre = PreCompensation::for_range(
                        link.range_m,
                        t.processing_latency_s,
                        t.coherence_time_s,
                    );
                    closed_loop_sim_precompensated(&process, &t.loop_config, &pre)
                }
            }
            .map_err(|e| e.with_context("tracking loop"))?;
            (result.residual_series.clone(), Some(result), Some(decision))
        }
    };

    let n_slots = s.slots as usize;
    let mask = residual_to_fade_mask(&residual, capture, n_slots as f64 / s.duration_s, n_slots)
        .map_err(|e| e.with_context("fade mask"))?;

    let tx = Transmission {
        source: &s.source,
        detector: &s.detector,
        transmittance,
        background_rate_hz: background,
        fade_mask: Some(&mask.pass),
    };
    let stats_tx = b92::simulate(&tx, n_slots, rng::derive_u64(s.master_seed, "b92", 0), exec)
        .map_err(|e| e.with_context("protocol Monte Carlo"))?;

    Ok(SimResult {
        stats: stats_tx,
        availability: mask.availability(),
        transmittance,
        loop_result,
        strategy,
        derived_turbulence: stats,
        config_echo: s.clone(),
        assumption_flags: flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(s: Scenario) -> Scenario {
        Scenario {
            slots: 200_000,
            duration_s: 0.2,
            ..s
        }
    }

    #[test]
    fn ideal_vacuum_link_is_error_free() {
        let s = small(Scenario {
            turbulence: TurbulenceParams::VACUUM,
            source: PulseSource {
                extinction_ratio_db: f64::INFINITY,
                ..PulseSource::default()
            },
            detector: DetectorModel {
                dark_count_rate_hz: 0.0,
                ..DetectorModel::default()
            },
            background: BackgroundEnvironment {
                sky_radiance: 0.0,
                label: "dark".into(),
            },
            ..Scenario::default()
        });
        let r = run_scenario(&s).unwrap();
        assert_eq!(r.availability, 1.0);
        assert_eq!(r.stats.qber, Some(0.0));
        assert!(r.stats.conclusive_count > 0);
    }

    #[test]
    fn echo_reproduces_result() {
        let s = small(Scenario::default());
        let a = run_scenario_with(&s, Execution::Parallel).unwrap();
        let b = run_scenario_with(&a.config_echo, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_scenario_carries_context() {
        let s = Scenario {
            duration_s: 0.0,
            ..Scenario::default()
        };
        let e = run_scenario(&s).unwrap_err();
        assert!(e.to_string().contains("invalid scenario"));
        assert!(e.to_string().contains("duration_s"));
    }

    #[test]
    fn tracking_never_reduces_availability_in_strong_turbulence() {
        // 1.5 km at 1e-14 with focal-plane fades: the open loop loses
        // a visible fraction of slots.
        let base = small(Scenario {
            link: LinkConfig {
                range_m: 1500.0,
                ..LinkConfig::default()
            },
            turbulence: TurbulenceParams { cn2: 1e-14 },
            ..Scenario::default()
        });
        let open = run_scenario(&base).unwrap();
        let tracked = run_scenario(&Scenario {
            tracking: Some(TrackingSetup::default()),
            ..base
        })
        .unwrap();
        assert!(open.availability < 1.0);
        assert!(tracked.availability >= open.availability);
        assert_eq!(
            tracked.strategy.unwrap().strategy,
            CompensationStrategy::ReceiverCompensation
        );
    }

    #[test]
    fn strong_turbulence_is_flagged() {
        let s = small(Scenario {
            link: LinkConfig {
                range_m: 2000.0,
                ..LinkConfig::default()
            },
            turbulence: TurbulenceParams { cn2: 1e-13 },
            ..Scenario::default()
        });
        let r = run_scenario(&s).unwrap();
        assert!(r.assumption_flags.contains(&AssumptionFlag::StrongFluctuation));
    }
}
