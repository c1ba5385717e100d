use rand::Rng;

use super::{AliceSequence, DetectorModel, PulseSource, BLOCK_SLOTS};
use crate::error::{non_negative, probability, Error, Result};
use crate::exec::{self, Execution};
use crate::rng;

/// One registered detector click.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Click {
    pub slot: u64,
    pub channel: u8,
}

/// Clicks surviving dead time, sorted by `(slot, channel)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DetectionRecord {
    pub clicks: Vec<Click>,
    pub n_slots: u64,
    pub dead_time_suppressed: usize,
}

impl DetectionRecord {
    pub fn detection_slots(&self) -> usize {
        let mut n = 0;
        let mut last = None;
        for c in &self.clicks {
            if last != Some(c.slot) {
                n += 1;
                last = Some(c.slot);
            }
        }
        n
    }
}

/// Photon-level Monte Carlo of the quantum channel and Bob's two-detector
/// receiver.
///
/// Per slot: the pulse carries Poisson(μ) photons; each survives with
/// probability `transmittance · efficiency` (zero in faded slots), takes
/// either splitter arm with probability ½ and crosses that arm's polarizer
/// per [`PulseSource::polarizer_pass_matrix`]. Each detector also fires
/// with probability 1 − exp(−(dark + background)·gate). Dead time is then
/// applied per detector against its last registered click.
///
/// Photon and noise draws use separate streams so that changing the noise
/// rate leaves the photon path untouched for the same seed.
#[allow(clippy::too_many_arguments)]
pub fn channel_detect(
    alice: &AliceSequence,
    transmittance: f64,
    background_rate_hz: f64,
    det: &DetectorModel,
    src: &PulseSource,
    fade_mask: Option<&[bool]>,
    seed: u64,
    exec: Execution,
) -> Result<DetectionRecord> {
    probability("transmittance", transmittance)?;
    non_negative("background_rate_hz", background_rate_hz)?;
    det.validate()?;
    src.validate()?;
    if let Some(mask) = fade_mask {
        if mask.len() != alice.len() {
            return Err(Error::Shape(format!(
                "fade mask has {} slots, sequence has {}",
                mask.len(),
                alice.len()
            )));
        }
    }

    let survive = transmittance * det.efficiency;
    let pass = src.polarizer_pass_matrix();
    let noise = -(-(det.dark_count_rate_hz + background_rate_hz) * det.gate_window_s).exp_m1();
    let mu = src.mu;
    let bits = alice.bits();

    let blocks = exec::blocks(alice.len(), BLOCK_SLOTS);
    let raw = exec::map_slice(exec, &blocks, |&(start, end)| {
        let block = (start / BLOCK_SLOTS) as u64;
        let mut photon_rng = rng::stream(seed, "photon", block);
        let mut noise_rng = rng::stream(seed, "noise", block);
        let mut out = Vec::new();
        for slot in start..end {
            let bit = bits[slot] as usize;
            let open = fade_mask.is_none_or(|m| m[slot]);
            let p_survive = if open { survive } else { 0.0 };

            let mut hit = [false; 2];
            let n = poisson_inverse(mu, photon_rng.random::<f64>());
            for _ in 0..n {
                let alive = photon_rng.random::<f64>() < p_survive;
                let ch = usize::from(photon_rng.random::<f64>() >= 0.5);
                let through = photon_rng.random::<f64>() < pass[ch][bit];
                if alive && through {
                    hit[ch] = true;
                }
            }
            for (ch, h) in hit.iter_mut().enumerate() {
                if noise_rng.random::<f64>() < noise {
                    *h = true;
                }
                if *h {
                    out.push(Click {
                        slot: slot as u64,
                        channel: ch as u8,
                    });
                }
            }
        }
        out
    });

    let (clicks, suppressed) = apply_dead_time(raw.concat(), det.dead_time_s, src.clock_rate_hz);
    Ok(DetectionRecord {
        clicks,
        n_slots: alice.len() as u64,
        dead_time_suppressed: suppressed,
    })
}

/// Smallest `n` with CDF(n) ≥ `u` for Poisson(`mu`).
fn poisson_inverse(mu: f64, u: f64) -> u32 {
    let mut p = (-mu).exp();
    let mut cdf = p;
    let mut n = 0;
    while u > cdf && p > 0.0 {
        n += 1;
        p *= mu / f64::from(n);
        cdf += p;
    }
    n
}

/// Drops clicks closer than `dead_time_s` to the previous registered click
/// on the same detector. Input must be sorted by slot.
fn apply_dead_time(clicks: Vec<Click>, dead_time_s: f64, clock_rate_hz: f64) -> (Vec<Click>, usize) {
    if dead_time_s <= 0.0 {
        return (clicks, 0);
    }
    let slot_period = 1.0 / clock_rate_hz;
    let mut last: [Option<u64>; 2] = [None, None];
    let mut kept = Vec::with_capacity(clicks.len());
    let mut dropped = 0;
    for c in clicks {
        let ch = c.channel as usize;
        let blind = last[ch].is_some_and(|prev| ((c.slot - prev) as f64) * slot_period < dead_time_s);
        if blind {
            dropped += 1;
        } else {
            last[ch] = Some(c.slot);
            kept.push(c);
        }
    }
    (kept, dropped)
}
