//! Binary narrow-sense BCH and extended BCH component codes.
//!
//! Bit layout of a codeword of length `n`:
//!
//! * indices `0..k` carry the information bits (systematic prefix),
//! * indices `k..n_parent` carry the parity bits of the BCH code,
//! * for extended codes, index `n - 1` carries the overall (even) parity.
//!
//! Index `i < n_parent` is the coefficient of `x^(n_parent - 1 - i)` of the
//! code polynomial, so the information prefix occupies the high degrees and
//! shortening removes the leading (highest-degree) information positions.
//!
//! Decoding runs syndromes, Berlekamp-Massey with an erasure-initialised
//! locator, Chien search and Forney's formula. The same routine serves
//! bounded-distance decoding (no erasures) and errors-and-erasures decoding.

use crate::error::{Error, Result};
use crate::gf::GaloisField;

/// Outcome status of a component decoding attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Decoded,
    Failure,
}

/// Component decoder output over {-1, 0, +1}.
///
/// A decoded word maps bit 0 to +1 and bit 1 to -1; a failure is all zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernaryWord {
    values: Vec<i8>,
    status: DecodeStatus,
}

impl TernaryWord {
    pub fn decoded(bits: &[u8]) -> Self {
        Self {
            values: bits.iter().map(|&b| 1 - 2 * (b & 1) as i8).collect(),
            status: DecodeStatus::Decoded,
        }
    }

    pub fn failure(n: usize) -> Self {
        Self {
            values: vec![0; n],
            status: DecodeStatus::Failure,
        }
    }

    /// Builds a word from raw ternary values, checking the status invariant.
    pub fn from_values(values: Vec<i8>) -> Result<Self> {
        if values.iter().all(|&v| v == 0) {
            return Ok(Self {
                status: DecodeStatus::Failure,
                values,
            });
        }
        if values.iter().all(|&v| v == 1 || v == -1) {
            return Ok(Self {
                values,
                status: DecodeStatus::Decoded,
            });
        }
        Err(Error::MalformedMessage(
            "ternary word mixes zero and nonzero values".into(),
        ))
    }

    #[inline]
    pub fn status(&self) -> DecodeStatus {
        self.status
    }

    #[inline]
    pub fn is_decoded(&self) -> bool {
        self.status == DecodeStatus::Decoded
    }

    #[inline]
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Hard bits of a decoded word; `None` on failure.
    pub fn bits(&self) -> Option<Vec<u8>> {
        self.is_decoded()
            .then(|| self.values.iter().map(|&v| (v < 0) as u8).collect())
    }
}

/// A binary BCH code over GF(2^v), optionally shortened and extended.
#[derive(Clone, Debug)]
pub struct BchCode {
    gf: GaloisField,
    t: usize,
    shortening: usize,
    extended: bool,
    /// Length of the (shortened) BCH part, excluding the extension bit.
    parent_len: usize,
    n: usize,
    k: usize,
    /// Generator polynomial over GF(2), lowest degree first.
    generator: Vec<u8>,
}

/// Positions (codeword indices) to flip, as produced by a successful decode.
pub type Flips = Vec<usize>;

/// Sufficient statistics of a received word for the decoding core.
struct Received {
    syn: Vec<u16>,
    /// XOR of the BCH-part bits (erased positions count as zero).
    parent_parity: u8,
    /// Received extension bit (extended codes only).
    ext_bit: u8,
}

impl BchCode {
    /// Builds the narrow-sense code with generator `lcm(m_1, ..., m_2t)`.
    pub fn new(order_exponent: u32, t: usize, shortening: usize, extended: bool) -> Result<Self> {
        let gf = GaloisField::new(order_exponent)?;
        let cycle = gf.cycle();
        if t == 0 || 2 * t >= cycle {
            return Err(Error::InvalidParameters(format!(
                "t = {t} unsupported for GF(2^{order_exponent})"
            )));
        }
        let generator = generator_poly(&gf, t);
        let parity = generator.len() - 1;
        if shortening + parity >= cycle {
            return Err(Error::InvalidParameters(format!(
                "shortening {shortening} leaves no information bits (k <= 0)"
            )));
        }
        let parent_len = cycle - shortening;
        let k = parent_len - parity;
        let n = parent_len + extended as usize;
        Ok(Self {
            gf,
            t,
            shortening,
            extended,
            parent_len,
            n,
            k,
            generator,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }
    #[inline]
    pub fn t(&self) -> usize {
        self.t
    }
    #[inline]
    pub fn shortening(&self) -> usize {
        self.shortening
    }
    #[inline]
    pub fn is_extended(&self) -> bool {
        self.extended
    }
    #[inline]
    pub fn order_exponent(&self) -> u32 {
        self.gf.order_exponent()
    }
    #[inline]
    pub fn field(&self) -> &GaloisField {
        &self.gf
    }
    /// Design distance: `2t + 1`, or `2t + 2` when extended.
    #[inline]
    pub fn dmin(&self) -> usize {
        2 * self.t + 1 + self.extended as usize
    }
    /// Generator polynomial coefficients over GF(2), lowest degree first.
    pub fn generator(&self) -> &[u8] {
        &self.generator
    }
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    #[inline]
    fn degree_of(&self, index: usize) -> usize {
        self.parent_len - 1 - index
    }

    /// Systematic encoding: `info` lands in indices `0..k`.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                actual: info.len(),
            });
        }
        let mut out = vec![0u8; self.n];
        self.encode_into(info, &mut out);
        Ok(out)
    }

    /// Encodes into `out[..n]`; lengths are the caller's responsibility.
    pub fn encode_into(&self, info: &[u8], out: &mut [u8]) {
        let p = self.parent_len - self.k;
        let g = &self.generator;
        let mut reg = vec![0u8; p];
        for (i, &b) in info.iter().enumerate() {
            let b = b & 1;
            out[i] = b;
            let fb = b ^ reg[p - 1];
            for j in (1..p).rev() {
                reg[j] = reg[j - 1] ^ (fb & g[j]);
            }
            reg[0] = fb & g[0];
        }
        for q in 0..p {
            out[self.k + q] = reg[p - 1 - q];
        }
        if self.extended {
            out[self.n - 1] = out[..self.parent_len].iter().fold(0, |a, &b| a ^ b);
        }
    }

    /// Syndromes `S_1..S_2t` of the BCH part of `bits`.
    pub fn syndromes(&self, bits: &[u8]) -> Vec<u16> {
        let ones = (0..self.parent_len).filter(|&i| bits[i] & 1 != 0);
        self.syndromes_from_ones(ones)
    }

    fn syndromes_from_ones(&self, ones: impl Iterator<Item = usize>) -> Vec<u16> {
        let gf = &self.gf;
        let two_t = 2 * self.t;
        let mut syn = vec![0u16; two_t];
        let cycle = gf.cycle();
        for i in ones {
            let d = self.degree_of(i) % cycle;
            // odd syndromes only; even ones follow from S_2j = S_j^2
            let mut j = 1;
            while j <= two_t {
                syn[j - 1] ^= gf.exp(d * j);
                j += 2;
            }
        }
        for j in 1..=self.t {
            let sj = syn[j - 1];
            syn[2 * j - 1] = gf.mul(sj, sj);
        }
        syn
    }

    fn received_dense(&self, bits: &[u8], erased: &[usize]) -> Received {
        let mut syn_bits;
        let src: &[u8] = if erased.is_empty() {
            bits
        } else {
            syn_bits = bits.to_vec();
            for &e in erased {
                syn_bits[e] = 0;
            }
            &syn_bits
        };
        let parent_parity = src[..self.parent_len].iter().fold(0, |a, &b| a ^ (b & 1));
        Received {
            syn: self.syndromes(src),
            parent_parity,
            ext_bit: if self.extended { src[self.n - 1] & 1 } else { 0 },
        }
    }

    /// Bounded-distance decoding: the codeword within Hamming distance `t`,
    /// if one exists.
    pub fn bdd_decode(&self, bits: &[u8]) -> Result<TernaryWord> {
        self.check_len(bits)?;
        Ok(match self.bdd_flips(bits) {
            Some(flips) => self.apply(bits, &flips),
            None => TernaryWord::failure(self.n),
        })
    }

    /// Like [`bdd_decode`](Self::bdd_decode) but returns the positions to
    /// flip instead of a full word. Panics if `bits.len() != n`.
    pub fn bdd_flips(&self, bits: &[u8]) -> Option<Flips> {
        assert_eq!(bits.len(), self.n);
        let rx = self.received_dense(bits, &[]);
        self.decode_received(rx, &[])
    }

    /// BDD of the all-zero codeword received with ones at `ones` (sorted or
    /// not, distinct). Avoids touching the zero positions.
    pub fn bdd_flips_sparse(&self, ones: &[usize]) -> Option<Flips> {
        let parent: Vec<usize> = ones.iter().copied().filter(|&i| i < self.parent_len).collect();
        let rx = Received {
            syn: self.syndromes_from_ones(parent.iter().copied()),
            parent_parity: (parent.len() & 1) as u8,
            ext_bit: (self.extended && ones.contains(&(self.n - 1))) as u8,
        };
        self.decode_received(rx, &[])
    }

    /// Errors-and-erasures decoding. Erased positions carry no information;
    /// the transmitted codeword is recovered whenever `2e + s <= dmin - 1`.
    pub fn eed_decode(&self, bits: &[u8], erasures: &[usize]) -> Result<TernaryWord> {
        self.check_len(bits)?;
        self.check_erasures(erasures)?;
        Ok(match self.eed_flips(bits, erasures) {
            Some(flips) => self.apply_erased(bits, erasures, &flips),
            None => TernaryWord::failure(self.n),
        })
    }

    /// Flip positions relative to `bits` with the erased positions set to 0.
    pub fn eed_flips(&self, bits: &[u8], erasures: &[usize]) -> Option<Flips> {
        assert_eq!(bits.len(), self.n);
        if erasures.len() >= self.dmin() {
            return None;
        }
        let rx = self.received_dense(bits, erasures);
        self.decode_received(rx, erasures)
    }

    fn check_len(&self, bits: &[u8]) -> Result<()> {
        if bits.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: bits.len(),
            });
        }
        Ok(())
    }

    fn check_erasures(&self, erasures: &[usize]) -> Result<()> {
        for (i, &e) in erasures.iter().enumerate() {
            if e >= self.n {
                return Err(Error::InvalidParameters(format!(
                    "erasure position {e} outside 0..{}",
                    self.n
                )));
            }
            if erasures[..i].contains(&e) {
                return Err(Error::InvalidParameters(format!(
                    "duplicate erasure position {e}"
                )));
            }
        }
        Ok(())
    }

    fn apply(&self, bits: &[u8], flips: &[usize]) -> TernaryWord {
        let mut out = bits.to_vec();
        for &f in flips {
            out[f] ^= 1;
        }
        TernaryWord::decoded(&out)
    }

    fn apply_erased(&self, bits: &[u8], erasures: &[usize], flips: &[usize]) -> TernaryWord {
        let mut out = bits.to_vec();
        for &e in erasures {
            out[e] = 0;
        }
        for &f in flips {
            out[f] ^= 1;
        }
        TernaryWord::decoded(&out)
    }

    /// Shared decoding core for dense and sparse inputs.
    ///
    /// `erasures` are codeword indices; `rx` must have been built with those
    /// positions zeroed. Returns flips relative to that zero-filled word.
    fn decode_received(&self, rx: Received, erasures: &[usize]) -> Option<Flips> {
        let s = erasures.len();
        if !self.extended {
            let degs: Vec<usize> = erasures.iter().map(|&e| self.degree_of(e)).collect();
            let flips = self.errata(&rx.syn, &degs)?;
            return Some(flips.into_iter().map(|d| self.degree_of(d)).collect());
        }

        // Extended code: accept the candidate closest to the received word
        // on non-erased positions, provided 2d + s <= 2t + 1.
        let ext = self.n - 1;
        let ext_erased = erasures.contains(&ext);
        let parent_erasures: Vec<usize> = erasures.iter().copied().filter(|&e| e != ext).collect();
        let limit = 2 * self.t + 1;

        let evaluate = |syn: &[u16], parent_parity: u8, erased: &[usize], preset: Option<usize>| -> Option<(usize, Flips)> {
            let degs: Vec<usize> = erased.iter().map(|&e| self.degree_of(e)).collect();
            let errata = self.errata(syn, &degs)?;
            let mut flips: Flips = errata.into_iter().map(|d| self.degree_of(d)).collect();
            if let Some(p) = preset {
                // the preset erasure was filled with 1; express flips
                // relative to the zero-filled word
                toggle(&mut flips, p);
            }
            let mut dist = flips
                .iter()
                .filter(|&&f| !erasures.contains(&f))
                .count();
            let cand_parity = parent_parity ^ (flips.len() & 1) as u8 ^ preset.is_some() as u8;
            if ext_erased {
                if cand_parity != 0 {
                    flips.push(ext);
                }
            } else if cand_parity != rx.ext_bit {
                flips.push(ext);
                dist += 1;
            }
            (2 * dist + s <= limit).then_some((dist, flips))
        };

        if ext_erased || parent_erasures.len() % 2 == 0 {
            return evaluate(&rx.syn, rx.parent_parity, &parent_erasures, None).map(|(_, f)| f);
        }

        // Odd number of erasures inside the BCH part with the extension bit
        // observed: resolve the first erasure both ways.
        let first = parent_erasures[0];
        let rest = &parent_erasures[1..];
        let zero = evaluate(&rx.syn, rx.parent_parity, rest, None);
        let mut syn_one = rx.syn.clone();
        let d = self.degree_of(first) % self.gf.cycle();
        for (j, sj) in syn_one.iter_mut().enumerate() {
            *sj ^= self.gf.exp(d * (j + 1));
        }
        let one = evaluate(&syn_one, rx.parent_parity ^ 1, rest, Some(first));
        match (zero, one) {
            (Some(a), Some(b)) => Some(if b.0 < a.0 { b.1 } else { a.1 }),
            (Some(a), None) => Some(a.1),
            (None, Some(b)) => Some(b.1),
            (None, None) => None,
        }
    }

    /// Errata locations (as polynomial degrees) with value 1, given the
    /// syndromes of the zero-filled word and the erased degrees.
    fn errata(&self, syn: &[u16], erased: &[usize]) -> Option<Vec<usize>> {
        let gf = &self.gf;
        let two_t = 2 * self.t;
        let ne = erased.len();
        if ne > two_t {
            return None;
        }
        if ne == 0 && syn.iter().all(|&s| s == 0) {
            return Some(Vec::new());
        }

        // erasure locator Gamma(x) = prod (1 + X_j x)
        let mut gamma = vec![1u16];
        for &d in erased {
            let x = gf.exp(d);
            let mut next = vec![0u16; gamma.len() + 1];
            for (i, &g) in gamma.iter().enumerate() {
                next[i] ^= g;
                next[i + 1] ^= gf.mul(g, x);
            }
            gamma = next;
        }

        // Berlekamp-Massey initialised with the erasure locator
        let mut lambda = gamma.clone();
        let mut b = gamma;
        let mut l = ne;
        for r in (ne + 1)..=two_t {
            let mut delta = 0u16;
            for (j, &c) in lambda.iter().enumerate() {
                if j < r {
                    delta ^= gf.mul(c, syn[r - j - 1]);
                }
            }
            // x * B(x)
            b.insert(0, 0);
            if delta == 0 {
                continue;
            }
            let mut next = lambda.clone();
            if next.len() < b.len() {
                next.resize(b.len(), 0);
            }
            for (j, &c) in b.iter().enumerate() {
                next[j] ^= gf.mul(delta, c);
            }
            if 2 * l < r + ne {
                let dinv = gf.inv(delta);
                b = lambda.iter().map(|&c| gf.mul(c, dinv)).collect();
                l = r + ne - l;
            }
            lambda = next;
        }
        while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
            lambda.pop();
        }
        let deg = lambda.len() - 1;
        if deg != l || 2 * l > two_t + ne {
            return None;
        }

        // Chien search over the positions of the (shortened) code
        let cycle = gf.cycle();
        let mut roots = Vec::with_capacity(deg);
        let mut terms = lambda.clone();
        // position degree d <-> root x = alpha^{-d}; step terms by alpha^{-j}
        for d in 0..self.parent_len {
            if d > 0 {
                for (j, term) in terms.iter_mut().enumerate().skip(1) {
                    *term = gf.mul_exp(*term, cycle - j % cycle);
                }
            }
            let sum = terms.iter().fold(0u16, |a, &c| a ^ c);
            if sum == 0 {
                roots.push(d);
                if roots.len() == deg {
                    break;
                }
            }
        }
        if roots.len() != deg {
            return None;
        }
        if erased.iter().any(|e| !roots.contains(e)) {
            return None;
        }

        // Forney: e_k = Omega(X_k^-1) / Lambda'(X_k^-1)
        let mut omega = vec![0u16; two_t];
        for (i, &li) in lambda.iter().enumerate() {
            for (j, &sj) in syn.iter().enumerate() {
                if i + j < two_t {
                    omega[i + j] ^= gf.mul(li, sj);
                }
            }
        }
        let deriv: Vec<u16> = lambda
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| if j % 2 == 1 { c } else { 0 })
            .collect();
        let mut ones = Vec::with_capacity(deg);
        for &d in &roots {
            let xinv = gf.exp((cycle - d % cycle) % cycle);
            let num = gf.eval(&omega, xinv);
            let den = gf.eval(&deriv, xinv);
            if den == 0 {
                return None;
            }
            let value = gf.div(num, den);
            let is_erased = erased.contains(&d);
            match value {
                1 => ones.push(d),
                0 if is_erased => {}
                _ => return None,
            }
        }
        Some(ones)
    }
}

fn toggle(set: &mut Flips, p: usize) {
    if let Some(i) = set.iter().position(|&x| x == p) {
        set.swap_remove(i);
    } else {
        set.push(p);
    }
}

/// `lcm` of the minimal polynomials of `alpha^1 .. alpha^2t` over GF(2).
fn generator_poly(gf: &GaloisField, t: usize) -> Vec<u8> {
    let cycle = gf.cycle();
    let mut seen = vec![false; cycle];
    let mut g: Vec<u8> = vec![1];
    for j in 1..=2 * t {
        let j = j % cycle;
        if seen[j] {
            continue;
        }
        // cyclotomic coset of j
        let mut coset = Vec::new();
        let mut c = j;
        while !seen[c] {
            seen[c] = true;
            coset.push(c);
            c = (c * 2) % cycle;
        }
        // minimal polynomial prod (x + alpha^c), coefficients in GF(2^v)
        let mut m = vec![1u16];
        for &c in &coset {
            let root = gf.exp(c);
            let mut next = vec![0u16; m.len() + 1];
            for (i, &a) in m.iter().enumerate() {
                next[i + 1] ^= a;
                next[i] ^= gf.mul(a, root);
            }
            m = next;
        }
        debug_assert!(m.iter().all(|&c| c <= 1), "minimal polynomial not binary");
        let m: Vec<u8> = m.into_iter().map(|c| c as u8).collect();
        let mut prod = vec![0u8; g.len() + m.len() - 1];
        for (i, &a) in g.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (k, &b) in m.iter().enumerate() {
                prod[i + k] ^= b;
            }
        }
        g = prod;
    }
    g
}
