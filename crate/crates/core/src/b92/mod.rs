//! B92 two-state polarization protocol: source, photon-level detection,
//! sifting, QBER and secret-key-rate estimation.
//!
//! Slots are processed in fixed blocks of [`BLOCK_SLOTS`]; each block draws
//! from its own stream keyed by block index, so output does not depend on
//! the execution policy or the number of worker threads.

mod detect;
mod key;

use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, probability, Error, Result};
use crate::exec::{self, Execution};
use crate::rng;

pub use detect::{channel_detect, Click, DetectionRecord};
pub use key::{
    binary_entropy, qber, secret_key_rate, secret_key_rate_with, sift, QberEstimate, SiftedKey,
    ERROR_CORRECTION_EFFICIENCY, QBER_ABORT_THRESHOLD,
};

/// Slots per random-stream block.
pub const BLOCK_SLOTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSource {
    pub clock_rate_hz: f64,
    /// Mean photon number per pulse.
    pub mu: f64,
    /// Polarization angle for bit 0 and bit 1, rad.
    pub state_angles_rad: [f64; 2],
    /// Polarizer extinction ratio; `inf` is an ideal polarizer.
    pub extinction_ratio_db: f64,
}

impl Default for PulseSource {
    fn default() -> Self {
        PulseSource {
            clock_rate_hz: 1e9,
            mu: 0.1,
            state_angles_rad: [0.0, FRAC_PI_4],
            extinction_ratio_db: 30.0,
        }
    }
}

impl PulseSource {
    pub fn validate(&self) -> Result<()> {
        positive("source.clock_rate_hz", self.clock_rate_hz)?;
        positive("source.mu", self.mu)?;
        if self.mu > 100.0 {
            return Err(Error::domain("source.mu", self.mu, "must not exceed 100"));
        }
        for a in self.state_angles_rad {
            if !a.is_finite() {
                return Err(Error::domain("source.state_angles_rad", a, "must be finite"));
            }
        }
        if self.extinction_ratio_db.is_nan() || self.extinction_ratio_db < 0.0 {
            return Err(Error::domain(
                "source.extinction_ratio_db",
                self.extinction_ratio_db,
                "must be non-negative",
            ));
        }
        Ok(())
    }

    /// Transmission probability of the nominally blocking polarizer.
    pub fn extinction_leak(&self) -> f64 {
        if self.extinction_ratio_db.is_infinite() {
            0.0
        } else {
            10f64.powf(-self.extinction_ratio_db / 10.0)
        }
    }

    /// `pass[channel][bit]`: probability that a photon prepared for `bit`
    /// crosses the polarizer of `channel`.
    ///
    /// Channel `i` has its axis orthogonal to state `1 - i`, so it blocks
    /// that state up to the extinction leak and passes state `i` with
    /// probability sin² of the state separation.
    pub fn polarizer_pass_matrix(&self) -> [[f64; 2]; 2] {
        let leak = self.extinction_leak();
        let sep = (self.state_angles_rad[1] - self.state_angles_rad[0]).sin();
        let open = (1.0 - leak) * sep * sep + leak;
        [[open, leak], [leak, open]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_count_rate_hz: f64,
    pub dead_time_s: f64,
    /// Acceptance window per slot.
    pub gate_window_s: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel {
            efficiency: 0.5,
            dark_count_rate_hz: 500.0,
            dead_time_s: 50e-9,
            gate_window_s: 1e-9,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        probability("detector.efficiency", self.efficiency)?;
        non_negative("detector.dark_count_rate_hz", self.dark_count_rate_hz)?;
        non_negative("detector.dead_time_s", self.dead_time_s)?;
        non_negative("detector.gate_window_s", self.gate_window_s)?;
        Ok(())
    }
}

/// Alice's per-slot bits. Bit `b` is sent at `state_angles_rad[b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceSequence {
    bits: Vec<u8>,
}

impl AliceSequence {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::domain("alice bit", f64::from(*b), "must be 0 or 1"));
        }
        Ok(AliceSequence { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn angle(&self, slot: usize, src: &PulseSource) -> f64 {
        src.state_angles_rad[self.bits[slot] as usize]
    }
}

/// Uniform random bits, one per slot, reproducible per `seed`.
pub fn alice_generate(n_slots: usize, seed: u64, exec: Execution) -> Result<AliceSequence> {
    if n_slots == 0 {
        return Err(Error::domain("n_slots", 0.0, "must be positive"));
    }
    let blocks = exec::blocks(n_slots, BLOCK_SLOTS);
    let parts = exec::map_slice(exec, &blocks, |&(start, end)| {
        let mut rng = rng::stream(seed, "alice", (start / BLOCK_SLOTS) as u64);
        let mut out = Vec::with_capacity(end - start);
        let mut word = 0u64;
        for i in 0..end - start {
            if i % 64 == 0 {
                word = rng.random();
            }
            out.push(((word >> (i % 64)) & 1) as u8);
        }
        out
    });
    Ok(AliceSequence {
        bits: parts.concat(),
    })
}

/// Protocol-level outcome of one transmission window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionStats {
    pub slots_sent: u64,
    /// Slots with at least one registered click.
    pub detection_slots: u64,
    pub conclusive_count: u64,
    pub double_click_count: u64,
    pub error_count: u64,
    /// `None` when no conclusive slots were recorded.
    pub qber: Option<f64>,
    pub abort: bool,
    pub sifted_rate_bps: f64,
    pub secret_key_rate_bps: f64,
    pub background_rate_hz: f64,
    pub dead_time_suppressed: u64,
}

impl TransmissionStats {
    /// Sifts, estimates QBER and extrapolates the window to per-second
    /// rates at the source clock. Aborted windows yield no key.
    pub fn evaluate(
        alice: &AliceSequence,
        detections: &DetectionRecord,
        src: &PulseSource,
        background_rate_hz: f64,
    ) -> Result<Self> {
        let key = sift(alice, detections)?;
        let est = qber(&key.pairs);
        let slots = alice.len() as u64;
        let seconds = slots as f64 / src.clock_rate_hz;
        let sifted_rate_bps = key.pairs.len() as f64 / seconds;
        let secret_key_rate_bps = match est.qber {
            Some(q) if !est.abort => secret_key_rate(sifted_rate_bps, q)?,
            _ => 0.0,
        };
        Ok(TransmissionStats {
            slots_sent: slots,
            detection_slots: detections.detection_slots() as u64,
            conclusive_count: key.pairs.len() as u64,
            double_click_count: key.double_clicks as u64,
            error_count: est.errors as u64,
            qber: est.qber,
            abort: est.abort,
            sifted_rate_bps,
            secret_key_rate_bps,
            background_rate_hz,
            dead_time_suppressed: detections.dead_time_suppressed as u64,
        })
    }
}

/// Inputs for one Monte Carlo transmission window.
#[derive(Debug, Clone, Copy)]
pub struct Transmission<'a> {
    pub source: &'a PulseSource,
    pub detector: &'a DetectorModel,
    pub transmittance: f64,
    pub background_rate_hz: f64,
    pub fade_mask: Option<&'a [bool]>,
}

/// Alice generation, detection and key estimation for `n_slots` slots.
pub fn simulate(
    tx: &Transmission<'_>,
    n_slots: usize,
    seed: u64,
    exec: Execution,
) -> Result<TransmissionStats> {
    let alice = alice_generate(n_slots, rng::derive_u64(seed, "alice", 0), exec)?;
    let det = channel_detect(
        &alice,
        tx.transmittance,
        tx.background_rate_hz,
        tx.detector,
        tx.source,
        tx.fade_mask,
        rng::derive_u64(seed, "detect", 0),
        exec,
    )?;
    TransmissionStats::evaluate(&alice, &det, tx.source, tx.background_rate_hz)
}
