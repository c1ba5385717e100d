//! Config file schema. Top-level sections mirror `Scenario`; `plan`,
//! `interrupt`, `track` and `sweep` hold per-command settings.

use std::path::Path;

use b92link::b92::{DetectorModel, PulseSource};
use b92link::channel::{BackgroundEnvironment, LinkConfig};
use b92link::sim::{FadeModel, Scenario, TrackingSetup, PARAMETER_PATHS};
use b92link::tracking::{FsmParams, PidGains, TrackingLoopConfig, WanderProcess};
use b92link::turbulence::TurbulenceParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub duration_s: f64,
    pub slots: u64,
    pub master_seed: u64,
    pub link: LinkConfig,
    pub turbulence: TurbulenceParams,
    pub source: PulseSource,
    pub detector: DetectorModel,
    pub background: BackgroundEnvironment,
    /// Present: the run closes a tracking loop.
    pub tracking: Option<TrackingSection>,
    pub fade: FadeModel,
    pub plan: PlanSection,
    pub interrupt: InterruptSection,
    pub track: TrackSection,
    pub sweep: SweepSection,
}

impl Default for Config {
    fn default() -> Self {
        let s = Scenario::default();
        Config {
            duration_s: s.duration_s,
            slots: s.slots,
            master_seed: s.master_seed,
            link: s.link,
            turbulence: s.turbulence,
            source: s.source,
            detector: s.detector,
            background: s.background,
            tracking: None,
            fade: s.fade,
            plan: PlanSection::default(),
            interrupt: InterruptSection::default(),
            track: TrackSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

/// Loop hardware. Gains are tuned from the hardware when `pid` is absent;
/// the resolved config always carries them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackingSection {
    pub loop_rate_hz: f64,
    pub psd_noise_rms: f64,
    pub fsm_bandwidth_hz: f64,
    pub fsm_range: f64,
    pub fsm_slew_limit: f64,
    pub processing_latency_s: f64,
    pub coherence_time_s: f64,
    pub pid: Option<PidGains>,
}

impl Default for TrackingSection {
    fn default() -> Self {
        let t = TrackingSetup::default();
        let l = t.loop_config;
        TrackingSection {
            loop_rate_hz: l.loop_rate_hz,
            psd_noise_rms: l.psd_noise_rms,
            fsm_bandwidth_hz: l.fsm_bandwidth_hz,
            fsm_range: l.fsm_range,
            fsm_slew_limit: l.fsm_slew_limit,
            processing_latency_s: t.processing_latency_s,
            coherence_time_s: t.coherence_time_s,
            pid: None,
        }
    }
}

impl TrackingSection {
    fn resolve(&mut self) -> b92link::Result<()> {
        if self.pid.is_none() {
            let fsm = FsmParams {
                bandwidth_hz: self.fsm_bandwidth_hz,
                range: self.fsm_range,
                slew_limit: self.fsm_slew_limit,
            };
            let tuned = TrackingLoopConfig::tuned(self.loop_rate_hz, self.psd_noise_rms, fsm)?;
            self.pid = Some(tuned.pid);
        }
        Ok(())
    }

    pub fn loop_config(&self) -> TrackingLoopConfig {
        TrackingLoopConfig {
            pid: self.pid.unwrap_or(PidGains::ZERO),
            loop_rate_hz: self.loop_rate_hz,
            psd_noise_rms: self.psd_noise_rms,
            fsm_bandwidth_hz: self.fsm_bandwidth_hz,
            fsm_range: self.fsm_range,
            fsm_slew_limit: self.fsm_slew_limit,
        }
    }

    pub fn setup(&self) -> TrackingSetup {
        TrackingSetup {
            loop_config: self.loop_config(),
            processing_latency_s: self.processing_latency_s,
            coherence_time_s: self.coherence_time_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    pub cn2: Vec<f64>,
}

impl Default for PlanSection {
    fn default() -> Self {
        PlanSection {
            cn2: vec![1e-15, 1e-14, 1e-13],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterruptSection {
    pub distances_m: Vec<f64>,
    pub cn2: Vec<f64>,
    /// Defaults to the receiver aperture radius.
    pub capture_radius_m: Option<f64>,
}

impl Default for InterruptSection {
    fn default() -> Self {
        InterruptSection {
            distances_m: (2..=20).map(|i| 250.0 * i as f64).collect(),
            cn2: vec![0.0, 1e-15, 1e-14, 1e-13],
            capture_radius_m: None,
        }
    }
}

/// Stand-alone loop run on a synthetic disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackSection {
    pub wander_rms: f64,
    pub wander_bandwidth_hz: f64,
    pub duration_s: f64,
}

impl Default for TrackSection {
    fn default() -> Self {
        TrackSection {
            wander_rms: 2e-6,
            wander_bandwidth_hz: 100.0,
            duration_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            parameter: "background.sky_radiance".into(),
            values: (0..10).map(|i| i as f64 / 40.0).collect(),
        }
    }
}

/// Command-line overrides applied before resolution.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub slots: Option<u64>,
}

impl Config {
    pub fn load(path: &Path, o: Overrides) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text, o).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses, applies overrides, validates and fills derived defaults.
    pub fn parse(text: &str, o: Overrides) -> Result<Config, CliError> {
        let mut c: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(seed) = o.seed {
            c.master_seed = seed;
        }
        if let Some(slots) = o.slots {
            c.slots = slots;
        }
        c.resolve()?;
        Ok(c)
    }

    fn resolve(&mut self) -> Result<(), CliError> {
        // TOML integers are signed 64-bit
        for (field, v) in [("master_seed", self.master_seed), ("slots", self.slots)] {
            if v > i64::MAX as u64 {
                return Err(CliError::Config(format!("{field}: must be below 2^63 (got {v})")));
            }
        }
        if let Some(t) = &mut self.tracking {
            t.resolve().map_err(config_error)?;
        }
        self.scenario().validate().map_err(config_error)?;
        check_list("plan.cn2", &self.plan.cn2, false)?;
        check_list("interrupt.cn2", &self.interrupt.cn2, false)?;
        check_list("interrupt.distances_m", &self.interrupt.distances_m, false)?;
        check_list("sweep.values", &self.sweep.values, true)?;
        if let Some(r) = self.interrupt.capture_radius_m {
            if !(r.is_finite() && r > 0.0) {
                return Err(CliError::Config(format!(
                    "interrupt.capture_radius_m: must be positive (got {r})"
                )));
            }
        }
        if !PARAMETER_PATHS.contains(&self.sweep.parameter.as_str()) {
            return Err(CliError::Config(format!(
                "sweep.parameter: unknown path `{}`; valid paths: {}",
                self.sweep.parameter,
                PARAMETER_PATHS.join(", ")
            )));
        }
        self.track_process().validate().map_err(config_error)?;
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            link: self.link,
            turbulence: self.turbulence,
            source: self.source,
            detector: self.detector,
            background: self.background.clone(),
            tracking: self.tracking.map(|t| t.setup()),
            fade: self.fade,
            duration_s: self.duration_s,
            slots: self.slots,
            master_seed: self.master_seed,
        }
    }

    /// Loop used by `track`: the configured one, or the default hardware.
    pub fn track_loop(&self) -> TrackingLoopConfig {
        match &self.tracking {
            Some(t) => t.loop_config(),
            None => TrackingLoopConfig::default(),
        }
    }

    pub fn track_process(&self) -> WanderProcess {
        WanderProcess {
            rms: self.track.wander_rms,
            bandwidth_hz: self.track.wander_bandwidth_hz,
            sample_rate_hz: self.track_loop().loop_rate_hz,
            duration_s: self.track.duration_s,
            seed: self.master_seed,
        }
    }

    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Lowercase hex SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn config_error(e: b92link::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn check_list(field: &str, values: &[f64], allow_any_sign: bool) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Config(format!("{field}: needs at least one value")));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || (!allow_any_sign && v < 0.0) {
            return Err(CliError::Config(format!(
                "{field}[{i}]: must be finite and non-negative (got {v})"
            )));
        }
    }
    Ok(())
}
