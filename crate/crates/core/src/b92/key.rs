use super::{AliceSequence, DetectionRecord};
use crate::error::{Error, Result};

/// QBER above which the transmission is considered insecure.
pub const QBER_ABORT_THRESHOLD: f64 = 0.08;

/// Error-correction inefficiency factor in the key-rate bound.
pub const ERROR_CORRECTION_EFFICIENCY: f64 = 1.2;

/// Conclusive slots as `(alice_bit, bob_bit)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SiftedKey {
    pub pairs: Vec<(u8, u8)>,
    /// Slots where both detectors fired; these are discarded.
    pub double_clicks: usize,
}

/// Keeps slots where exactly one detector fired. A click on channel `i`
/// rules out state `1 - i`, so Bob records bit `i`.
pub fn sift(alice: &AliceSequence, detections: &DetectionRecord) -> Result<SiftedKey> {
    let bits = alice.bits();
    let mut key = SiftedKey::default();
    let clicks = &detections.clicks;
    let mut i = 0;
    while i < clicks.len() {
        let slot = clicks[i].slot;
        let alice_bit = *bits.get(slot as usize).ok_or_else(|| {
            Error::Shape(format!("detection in slot {slot} beyond {} sent", bits.len()))
        })?;
        let mut j = i + 1;
        while j < clicks.len() && clicks[j].slot == slot {
            j += 1;
        }
        let channels = clicks[i..j].iter().fold(0u8, |m, c| m | (1 << c.channel));
        match channels {
            0b01 => key.pairs.push((alice_bit, 0)),
            0b10 => key.pairs.push((alice_bit, 1)),
            _ => key.double_clicks += 1,
        }
        i = j;
    }
    Ok(key)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QberEstimate {
    pub errors: usize,
    pub total: usize,
    /// `None` for an empty key ("insufficient data").
    pub qber: Option<f64>,
    pub abort: bool,
}

/// Fraction of disagreeing pairs; aborts strictly above
/// [`QBER_ABORT_THRESHOLD`].
pub fn qber(pairs: &[(u8, u8)]) -> QberEstimate {
    let errors = pairs.iter().filter(|(a, b)| a != b).count();
    let total = pairs.len();
    let qber = (total > 0).then(|| errors as f64 / total as f64);
    QberEstimate {
        errors,
        total,
        qber,
        abort: qber.is_some_and(|q| q > QBER_ABORT_THRESHOLD),
    }
}

/// h₂(p) in bits, with 0·log 0 = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "must lie in [0, 1]"));
    }
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// R = R_sift · max(0, 1 − f_EC·h₂(q) − h₂(q)) with f_EC = 1.2.
pub fn secret_key_rate(sifted_rate_bps: f64, qber: f64) -> Result<f64> {
    secret_key_rate_with(sifted_rate_bps, qber, ERROR_CORRECTION_EFFICIENCY)
}

pub fn secret_key_rate_with(sifted_rate_bps: f64, qber: f64, f_ec: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&qber) {
        return Err(Error::domain("qber", qber, "must lie in [0, 0.5]"));
    }
    let h = binary_entropy(qber)?;
    Ok(sifted_rate_bps * (1.0 - (1.0 + f_ec) * h).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::b92::Click;
    use approx::assert_relative_eq;

    fn record(clicks: &[(u64, u8)], n: u64) -> DetectionRecord {
        DetectionRecord {
            clicks: clicks
                .iter()
                .map(|&(slot, channel)| Click { slot, channel })
                .collect(),
            n_slots: n,
            dead_time_suppressed: 0,
        }
    }

    #[test]
    fn sift_examples() {
        let alice = AliceSequence::from_bits(vec![1, 0, 1, 0]).unwrap();
        assert!(sift(&alice, &record(&[], 4)).unwrap().pairs.is_empty());

        let k = sift(&alice, &record(&[(0, 1)], 4)).unwrap();
        assert_eq!(k.pairs, vec![(1, 1)]);

        let k = sift(&alice, &record(&[(1, 0), (1, 1), (2, 0)], 4)).unwrap();
        assert_eq!(k.pairs, vec![(1, 0)]);
        assert_eq!(k.double_clicks, 1);

        assert!(sift(&alice, &record(&[(9, 0)], 4)).is_err());
    }

    #[test]
    fn qber_threshold_is_strict() {
        let mk = |errors: usize| -> Vec<(u8, u8)> {
            (0..100).map(|i| if i < errors { (0, 1) } else { (1, 1) }).collect()
        };
        let ok = qber(&mk(0));
        assert_eq!(ok.qber, Some(0.0));
        assert!(!ok.abort);

        let at = qber(&mk(8));
        assert_eq!(at.qber, Some(0.08));
        assert!(!at.abort);

        let over = qber(&mk(9));
        assert_eq!(over.qber, Some(0.09));
        assert!(over.abort);

        let empty = qber(&[]);
        assert_eq!(empty.qber, None);
        assert!(!empty.abort);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        // independent evaluation in double precision (python math.log2)
        assert_relative_eq!(binary_entropy(0.11).unwrap(), 0.499_915_958_164_528, max_relative = 1e-12);
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.01).is_err());
    }

    #[test]
    fn key_rate_examples() {
        assert_eq!(secret_key_rate(2e6, 0.0).unwrap(), 2e6);
        assert_eq!(secret_key_rate(2e6, 0.5).unwrap(), 0.0);
        // h₂(0.03) = 0.194391857831576 → 2·(1 − 2.2·h₂) Mbps
        assert_relative_eq!(
            secret_key_rate(2e6, 0.03).unwrap(),
            1.144_675_825_541_065e6,
            max_relative = 1e-12
        );
        assert!(secret_key_rate(2e6, 0.6).is_err());
        assert!(secret_key_rate(2e6, -0.1).is_err());
        // the bound closes a little above the abort threshold
        assert!(secret_key_rate(1e6, 0.08).unwrap() > 0.0);
        assert_eq!(secret_key_rate(1e6, 0.1).unwrap(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn entropy_symmetric_and_bounded(p in 0.0f64..=1.0) {
                let h = binary_entropy(p).unwrap();
                prop_assert!((0.0..=1.0).contains(&h));
                prop_assert!((h - binary_entropy(1.0 - p).unwrap()).abs() < 1e-12);
            }

            #[test]
            fn key_rate_non_increasing_in_qber(a in 0.0f64..0.5, b in 0.0f64..0.5, r in 0.0f64..1e9) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(secret_key_rate(r, hi).unwrap() <= secret_key_rate(r, lo).unwrap());
                prop_assert!(secret_key_rate(r, hi).unwrap() <= r);
            }
        }
    }
}
