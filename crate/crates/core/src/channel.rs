//! BICM over a real AWGN dimension: Gray-labelled PAM mapping (one real
//! dimension of an M^2-QAM constellation), noise, per-bit LLRs, random
//! interleaving and SNR bookkeeping.
//!
//! Labelling: amplitude index `i = 0..2^m` (most positive first) carries the
//! reflected Gray label `i ^ (i >> 1)`, so the all-zero label sits on the
//! positive end and bit 0 maps to +Δ when `m = 1`. Bit `q = 0` of a group is
//! the most significant label bit.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// One real dimension of a square M^2-QAM constellation, `M = 2^m`.
#[derive(Clone, Debug)]
pub struct Constellation {
    m: u32,
    delta: f64,
    /// Amplitude carrying label `l`, indexed by label.
    by_label: Vec<f64>,
}

impl Constellation {
    /// `m = 1` is the binary-input AWGN channel with Δ = 1. For `m >= 2`,
    /// Δ = sqrt(3 / (2 (M^2 - 1))) gives the complex M^2-QAM symbol unit
    /// energy.
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(Error::InvalidParameters(format!(
                "bits per real dimension m = {m} outside 1..=8"
            )));
        }
        let size = 1usize << m;
        let delta = if m == 1 {
            1.0
        } else {
            let mm = size as f64;
            (3.0 / (2.0 * (mm * mm - 1.0))).sqrt()
        };
        let mut by_label = vec![0.0; size];
        for i in 0..size {
            let label = i ^ (i >> 1);
            by_label[label] = (size as f64 - 1.0 - 2.0 * i as f64) * delta;
        }
        Ok(Self { m, delta, by_label })
    }

    #[inline]
    pub fn bits_per_dimension(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Amplitude for a label.
    #[inline]
    pub fn point(&self, label: usize) -> f64 {
        self.by_label[label]
    }

    pub fn points(&self) -> &[f64] {
        &self.by_label
    }

    /// Mean energy of one real-dimension symbol.
    pub fn energy_per_dimension(&self) -> f64 {
        self.by_label.iter().map(|a| a * a).sum::<f64>() / self.by_label.len() as f64
    }

    /// Noise standard deviation per real dimension for a given Eb/N0.
    ///
    /// Uses [`snr_to_sigma`] with `2m` bits per complex symbol, rescaled by
    /// the actual per-dimension energy (which differs from 1/2 only for the
    /// binary-input case with Δ = 1).
    pub fn sigma_for_ebn0(&self, ebn0_db: f64, rate: f64) -> Result<f64> {
        let unit = snr_to_sigma(ebn0_db, rate, 2 * self.m)?;
        Ok(unit * (2.0 * self.energy_per_dimension()).sqrt())
    }

    /// Maps bits (grouped `m` at a time) to amplitudes.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<f64>> {
        let m = self.m as usize;
        if bits.len() % m != 0 {
            return Err(Error::InvalidParameters(format!(
                "{} bits not divisible into groups of {m}",
                bits.len()
            )));
        }
        Ok(bits
            .chunks_exact(m)
            .map(|g| {
                let label = g.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
                self.by_label[label]
            })
            .collect())
    }

    /// Per-bit LLRs `ln P(b=0|y) / P(b=1|y)` of one observation, written to
    /// `out[..m]`. Full log-sum-exp over all points.
    pub fn bit_llrs_into(&self, y: f64, sigma: f64, out: &mut [f64]) {
        let m = self.m as usize;
        let inv = 1.0 / (2.0 * sigma * sigma);
        if m == 1 {
            let (a0, a1) = (self.by_label[0], self.by_label[1]);
            out[0] = ((y - a1) * (y - a1) - (y - a0) * (y - a0)) * inv;
            return;
        }
        let metrics: Vec<f64> = self
            .by_label
            .iter()
            .map(|&a| -(y - a) * (y - a) * inv)
            .collect();
        for (q, o) in out.iter_mut().enumerate().take(m) {
            let shift = m - 1 - q;
            let mut max0 = f64::NEG_INFINITY;
            let mut max1 = f64::NEG_INFINITY;
            for (label, &mu) in metrics.iter().enumerate() {
                if (label >> shift) & 1 == 0 {
                    max0 = max0.max(mu);
                } else {
                    max1 = max1.max(mu);
                }
            }
            let mut s0 = 0.0;
            let mut s1 = 0.0;
            for (label, &mu) in metrics.iter().enumerate() {
                if (label >> shift) & 1 == 0 {
                    s0 += (mu - max0).exp();
                } else {
                    s1 += (mu - max1).exp();
                }
            }
            *o = (max0 + s0.ln()) - (max1 + s1.ln());
        }
    }

    /// LLRs of a sequence of observations, `m` per observation.
    pub fn bit_llrs(&self, ys: &[f64], sigma: f64) -> Result<Vec<f64>> {
        if sigma <= 0.0 {
            return Err(Error::InvalidParameters(format!("sigma = {sigma}")));
        }
        let m = self.m as usize;
        let mut out = vec![0.0; ys.len() * m];
        for (y, chunk) in ys.iter().zip(out.chunks_exact_mut(m)) {
            self.bit_llrs_into(*y, sigma, chunk);
        }
        Ok(out)
    }
}

/// Adds white Gaussian noise of standard deviation `sigma`.
pub fn awgn(symbols: &[f64], sigma: f64, rng: &mut impl Rng) -> Vec<f64> {
    symbols
        .iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            x + sigma * z
        })
        .collect()
}

/// Noise standard deviation per real dimension for unit-energy complex
/// symbols carrying `bits_per_complex_symbol` coded bits:
/// `sigma^2 = 1 / (2 R b 10^(Eb/N0 / 10))`.
pub fn snr_to_sigma(ebn0_db: f64, code_rate: f64, bits_per_complex_symbol: u32) -> Result<f64> {
    if !(code_rate > 0.0 && code_rate <= 1.0) {
        return Err(Error::InvalidParameters(format!("code rate {code_rate}")));
    }
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    Ok((1.0 / (2.0 * code_rate * bits_per_complex_symbol as f64 * ebn0)).sqrt())
}

/// Inverse of [`Constellation::sigma_for_ebn0`].
pub fn sigma_to_ebn0_db(constellation: &Constellation, sigma: f64, rate: f64) -> f64 {
    let es = constellation.energy_per_dimension();
    let ebn0 = es / (2.0 * rate * constellation.bits_per_dimension() as f64 * sigma * sigma);
    10.0 * ebn0.log10()
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Uniformly random permutation used as the BICM bit interleaver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(rng);
        Self { perm }
    }

    pub fn from_seed(len: usize, seed: u64) -> Self {
        let mut rng = crate::rng::stream(seed, crate::rng::Purpose::Simulation, 0xFF_FFFF, 0);
        Self::random(len, &mut rng)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// `out[i] = input[perm[i]]`.
    pub fn interleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.perm.iter().map(|&p| input[p]).collect())
    }

    /// Inverse of [`interleave`](Self::interleave).
    pub fn deinterleave<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        let mut out = vec![T::default(); input.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = input[i];
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.perm.len() {
            return Err(Error::LengthMismatch {
                expected: self.perm.len(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Interleaves with the permutation drawn from `seed`.
pub fn interleave<T: Copy>(bits: &[T], seed: u64) -> Result<Vec<T>> {
    Interleaver::from_seed(bits.len(), seed).interleave(bits)
}

/// Inverts [`interleave`] for the same `seed` and length.
pub fn deinterleave<T: Copy + Default>(values: &[T], seed: u64) -> Result<Vec<T>> {
    Interleaver::from_seed(values.len(), seed).deinterleave(values)
}

/// Channel LLRs aligned with a code array (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct LlrGrid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    sigma: f64,
}

impl LlrGrid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>, sigma: f64) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data, sigma })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Transmits `bits` over BICM/AWGN: interleave, pad to a multiple of `m`
/// with zeros, modulate, add noise, demap, deinterleave. Returns one LLR per
/// input bit.
pub fn transmit(
    bits: &[u8],
    constellation: &Constellation,
    sigma: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let m = constellation.bits_per_dimension() as usize;
    let interleaver = Interleaver::random(bits.len(), rng);
    let mut tx = interleaver.interleave(bits)?;
    let pad = (m - tx.len() % m) % m;
    tx.extend(std::iter::repeat_n(0u8, pad));
    let symbols = constellation.modulate(&tx)?;
    let ys = awgn(&symbols, sigma, rng);
    let mut llrs = constellation.bit_llrs(&ys, sigma)?;
    llrs.truncate(bits.len());
    interleaver.deinterleave(&llrs)
}

/// Distribution of the channel LLR of a code bit conditioned on that bit
/// being 0, mixed uniformly over bit levels and symbols (i.e. with channel
/// adapters). Exact for `m = 1`; tabulated by quadrature otherwise.
#[derive(Clone, Debug)]
pub enum LlrDistribution {
    Gaussian { mean: f64, std: f64 },
    Tabulated { values: Vec<f64>, cumulative: Vec<f64> },
}

impl LlrDistribution {
    pub fn new(constellation: &Constellation, sigma: f64) -> Self {
        if constellation.bits_per_dimension() == 1 {
            let d = constellation.delta();
            let mean = 2.0 * d * d / (sigma * sigma);
            return Self::Gaussian { mean, std: 2.0 * d / sigma };
        }
        Self::quadrature(constellation, sigma, 6000)
    }

    /// Midpoint quadrature over the noise with exact Gaussian cell masses.
    pub fn quadrature(constellation: &Constellation, sigma: f64, cells: usize) -> Self {
        let m = constellation.bits_per_dimension() as usize;
        let size = 1usize << m;
        let span = 9.0;
        let width = 2.0 * span / cells as f64;
        let mass: Vec<f64> = (0..cells)
            .map(|c| {
                let lo = -span + c as f64 * width;
                q_function(lo) - q_function(lo + width)
            })
            .collect();
        let weight = 1.0 / (size * m) as f64;
        let mut atoms = Vec::with_capacity(size * m * cells);
        let mut llr = vec![0.0; m];
        for label in 0..size {
            let a = constellation.point(label);
            for (c, &p) in mass.iter().enumerate() {
                let z = -span + (c as f64 + 0.5) * width;
                constellation.bit_llrs_into(a + sigma * z, sigma, &mut llr);
                for (q, &l) in llr.iter().enumerate() {
                    let bit = (label >> (m - 1 - q)) & 1;
                    let adapted = if bit == 0 { l } else { -l };
                    atoms.push((adapted, p * weight));
                }
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for &(_, p) in &atoms {
            acc += p;
            cumulative.push(acc);
        }
        let total = acc;
        for c in &mut cumulative {
            *c /= total;
        }
        Self::Tabulated {
            values: atoms.into_iter().map(|a| a.0).collect(),
            cumulative,
        }
    }

    /// `P(L < x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { mean, std } => 1.0 - q_function((x - mean) / std),
            Self::Tabulated { values, cumulative } => {
                let idx = values.partition_point(|&v| v < x);
                if idx == 0 {
                    0.0
                } else {
                    cumulative[idx - 1]
                }
            }
        }
    }

    /// Bit error probability of hard detection, `P(L < 0)`.
    pub fn p_ch(&self) -> f64 {
        self.cdf(0.0)
    }

    /// Draws one LLR.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Self::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
            Self::Tabulated { values, cumulative } => {
                let u: f64 = rng.random();
                let idx = cumulative.partition_point(|&c| c < u).min(values.len() - 1);
                values[idx]
            }
        }
    }
}

/// Hard-detection bit error probability on the channel LLRs.
pub fn p_ch(constellation: &Constellation, sigma: f64) -> f64 {
    if constellation.bits_per_dimension() == 1 {
        q_function(constellation.delta() / sigma)
    } else {
        LlrDistribution::new(constellation, sigma).p_ch()
    }
}
