//! Building blocks shared by the soft-aided decoders: hard slicing,
//! generalised distance, reliability combining and the `n + 1` bit message
//! format exchanged between phases.

use crate::bch::TernaryWord;
use crate::error::{Error, Result};
use crate::lut::CombiningLut;

/// Slices an LLR to a bit. Zero maps to 0.
#[inline]
pub fn hard_map(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

/// Generalised distance between two binary words under per-bit
/// reliabilities: `sum_{a=b} (1 - alpha) + sum_{a!=b} (1 + alpha)` with
/// `alpha_i = r_i / max r`. An all-zero reliability vector gives `alpha = 0`.
pub fn gd(a: &[u8], b: &[u8], reliabilities: &[f64]) -> Result<f64> {
    let n = a.len();
    for len in [b.len(), reliabilities.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, actual: len });
        }
    }
    Ok(gd_unchecked(a, b, reliabilities))
}

/// [`gd`] without the length checks.
pub fn gd_unchecked(a: &[u8], b: &[u8], reliabilities: &[f64]) -> f64 {
    let max = reliabilities.iter().fold(0.0f64, |m, &r| m.max(r.abs()));
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    let mut score = 0.0;
    for ((&x, &y), &r) in a.iter().zip(b).zip(reliabilities) {
        let alpha = r.abs() * scale;
        score += if x == y { 1.0 - alpha } else { 1.0 + alpha };
    }
    score
}

/// Score of a branch whose component decoder failed.
#[inline]
pub fn failure_score(n: usize) -> f64 {
    2.0 * n as f64
}

/// `out_i = values_i * w + llr_i`.
#[inline]
pub fn combine_into(values: &[i8], llrs: &[f64], w: f64, out: &mut [f64]) {
    for ((o, &v), &l) in out.iter_mut().zip(values).zip(llrs) {
        *o = v as f64 * w + l;
    }
}

/// Adds the table reliability of a component outcome to the channel LLRs.
pub fn lut_apply(
    outcome: &TernaryWord,
    channel_llrs: &[f64],
    lut: &CombiningLut,
    iteration: usize,
) -> Result<Vec<f64>> {
    if outcome.len() != channel_llrs.len() {
        return Err(Error::LengthMismatch {
            expected: outcome.len(),
            actual: channel_llrs.len(),
        });
    }
    let w = lut.weight(iteration)?;
    let mut out = vec![0.0; channel_llrs.len()];
    combine_into(outcome.values(), channel_llrs, w, &mut out);
    Ok(out)
}

/// Indices of the two smallest magnitudes, lowest index first on ties.
pub fn two_least_reliable(magnitudes: &[f64]) -> Result<(usize, usize)> {
    if magnitudes.len() < 2 {
        return Err(Error::InvalidParameters(format!(
            "need at least two positions, got {}",
            magnitudes.len()
        )));
    }
    Ok(two_least_reliable_by(magnitudes.len(), |i| magnitudes[i]))
}

/// [`two_least_reliable`] over a reliability function, `n >= 2`.
#[inline]
pub fn two_least_reliable_by(n: usize, rel: impl Fn(usize) -> f64) -> (usize, usize) {
    let (mut i1, mut v1) = (usize::MAX, f64::INFINITY);
    let (mut i2, mut v2) = (usize::MAX, f64::INFINITY);
    for i in 0..n {
        let v = rel(i).abs();
        if v < v1 || i1 == usize::MAX {
            i2 = i1;
            v2 = v1;
            i1 = i;
            v1 = v;
        } else if v < v2 || i2 == usize::MAX {
            i2 = i;
            v2 = v;
        }
    }
    (i1, i2)
}

/// A ternary component outcome in its `n + 1` bit wire format: a status flag
/// (1 = decoded) followed by the payload (+1 -> 0, -1 -> 1, zeros on
/// failure).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedMessage {
    bits: Vec<u8>,
}

impl PackedMessage {
    pub fn pack(word: &TernaryWord) -> Self {
        let mut bits = Vec::with_capacity(word.len() + 1);
        bits.push(word.is_decoded() as u8);
        bits.extend(word.values().iter().map(|&v| (v < 0) as u8));
        Self { bits }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(Error::MalformedMessage("not a non-empty bit vector".into()));
        }
        Ok(Self { bits })
    }

    pub fn unpack(&self) -> Result<TernaryWord> {
        let (&flag, payload) = self
            .bits
            .split_first()
            .ok_or_else(|| Error::MalformedMessage("empty message".into()))?;
        if flag == 0 {
            if payload.iter().any(|&b| b != 0) {
                return Err(Error::MalformedMessage(
                    "failure flag with nonzero payload".into(),
                ));
            }
            return Ok(TernaryWord::failure(payload.len()));
        }
        Ok(TernaryWord::decoded(payload))
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

    /// Relative increase over sending `n` hard bits: `1/n`.
    pub fn overhead(n: usize) -> f64 {
        (n as f64 + 1.0) / n as f64 - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn slicing() {
        assert_eq!(hard_map(3.2), 0);
        assert_eq!(hard_map(-0.1), 1);
        assert_eq!(hard_map(0.0), 0);
        assert_eq!(hard_map(-0.0), 0);
    }

    #[test]
    fn gd_examples() {
        let a = [0, 1, 1, 0];
        assert_eq!(gd(&a, &a, &[1.0; 4]).unwrap(), 0.0);
        let b = [1, 0, 0, 1];
        assert_eq!(gd(&a, &b, &[2.0; 4]).unwrap(), 8.0);
        assert_eq!(gd(&a, &b, &[0.0; 4]).unwrap(), 4.0);
        assert!(gd(&a, &b[..3], &[1.0; 4]).is_err());
        // binary alpha: 1 on matches, 0 on mismatches
        let c = [0, 1, 0, 0];
        assert_eq!(gd(&a, &c, &[5.0, 5.0, 0.0, 5.0]).unwrap(), 1.0);
    }

    #[test]
    fn two_least() {
        assert_eq!(two_least_reliable(&[3.0, 1.0, 2.0, 0.5]).unwrap(), (3, 1));
        assert_eq!(two_least_reliable(&[1.0; 5]).unwrap(), (0, 1));
        assert_eq!(two_least_reliable(&[0.0, 0.0, 5.0, 5.0]).unwrap(), (0, 1));
        assert_eq!(two_least_reliable(&[5.0, -0.2, 0.1]).unwrap(), (2, 1));
        assert!(two_least_reliable(&[1.0]).is_err());
    }

    #[test]
    fn lut_examples() {
        let lut = CombiningLut::new("test", 0.5, 1, vec![2.5, 0.0]).unwrap();
        let dec = TernaryWord::decoded(&[0, 1]);
        assert_eq!(lut_apply(&dec, &[-1.0, 0.3], &lut, 0).unwrap(), vec![1.5, -2.2]);
        let fail = TernaryWord::failure(2);
        assert_eq!(lut_apply(&fail, &[-1.0, 0.3], &lut, 0).unwrap(), vec![-1.0, 0.3]);
        assert_eq!(lut_apply(&dec, &[-1.0, 0.3], &lut, 1).unwrap(), vec![-1.0, 0.3]);
        assert!(lut_apply(&dec, &[-1.0, 0.3], &lut, 2).is_err());
    }

    #[test]
    fn pack_examples() {
        let ok = PackedMessage::pack(&TernaryWord::decoded(&[0; 255]));
        assert_eq!(ok.len(), 256);
        assert_eq!(ok.bits()[0], 1);
        assert!(ok.bits()[1..].iter().all(|&b| b == 0));
        let fail = PackedMessage::pack(&TernaryWord::failure(255));
        assert_eq!(fail.bits(), &[0u8; 256][..]);
        let mut bad = vec![0u8; 5];
        bad[3] = 1;
        assert!(PackedMessage::from_bits(bad).unwrap().unpack().is_err());
        assert!((PackedMessage::overhead(255) * 100.0 - 0.392).abs() < 1e-3);
        assert!((PackedMessage::overhead(511) * 100.0 - 0.196).abs() < 1e-3);
    }

    fn ternary() -> impl Strategy<Value = TernaryWord> {
        (1usize..64, any::<bool>(), any::<u64>()).prop_map(|(n, ok, seed)| {
            if ok {
                let bits: Vec<u8> = (0..n).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
                TernaryWord::decoded(&bits)
            } else {
                TernaryWord::failure(n)
            }
        })
    }

    proptest! {
        #[test]
        fn pack_roundtrip(w in ternary()) {
            let p = PackedMessage::pack(&w);
            prop_assert_eq!(p.len(), w.len() + 1);
            prop_assert_eq!(p.unpack().unwrap(), w);
        }

        #[test]
        fn gd_bounds_and_symmetry(
            v in prop::collection::vec((0u8..2, 0u8..2, 0.0f64..10.0), 1..80)
        ) {
            let a: Vec<u8> = v.iter().map(|x| x.0).collect();
            let b: Vec<u8> = v.iter().map(|x| x.1).collect();
            let r: Vec<f64> = v.iter().map(|x| x.2).collect();
            let s = gd(&a, &b, &r).unwrap();
            prop_assert!(s >= 0.0 && s <= 2.0 * a.len() as f64 + 1e-9);
            prop_assert_eq!(s, gd(&b, &a, &r).unwrap());
        }

        #[test]
        fn gd_binary_alpha_is_hamming(
            v in prop::collection::vec((0u8..2, 0u8..2), 1..80), scale in 0.1f64..100.0
        ) {
            let a: Vec<u8> = v.iter().map(|x| x.0).collect();
            let b: Vec<u8> = v.iter().map(|x| x.1).collect();
            let r: Vec<f64> = v.iter().map(|x| if x.0 == x.1 { scale } else { 0.0 }).collect();
            let ham = a.iter().zip(&b).filter(|(x, y)| x != y).count() as f64;
            let s = gd(&a, &b, &r).unwrap();
            if r.iter().any(|&x| x > 0.0) {
                prop_assert!((s - ham).abs() < 1e-9);
            } else {
                prop_assert_eq!(s, a.len() as f64);
            }
        }

        #[test]
        fn combining_keeps_strong_channel_sign(l in -20.0f64..20.0, w in 0.0f64..10.0, neg in any::<bool>()) {
            let lut = CombiningLut::new("p", 1.0, 1, vec![w]).unwrap();
            let word = TernaryWord::decoded(&[neg as u8]);
            let out = lut_apply(&word, &[l], &lut, 0).unwrap()[0];
            if l.abs() > w {
                prop_assert_eq!(out.signum(), l.signum());
            }
        }
    }
}
