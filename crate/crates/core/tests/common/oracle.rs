//! Exhaustive nearest-codeword oracles for short codes (n <= 31).

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prodec::BchCode;

pub fn to_mask(bits: &[u8]) -> u32 {
    bits.iter().enumerate().fold(0, |m, (i, &b)| m | ((b as u32) << i))
}

pub fn to_bits(mask: u32, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((mask >> i) & 1) as u8).collect()
}

pub fn codebook(code: &BchCode) -> Vec<u32> {
    (0..1u32 << code.k())
        .map(|m| to_mask(&code.encode(&to_bits(m, code.k())).unwrap()))
        .collect()
}

/// The unique codeword with `2d + s <= dmin - 1`, where `d` counts
/// disagreements outside the erased positions.
pub fn nearest(book: &[u32], x: u32, erased: u32, dmin: usize, s: usize) -> Result<Option<u32>, String> {
    let mut found = None;
    for &c in book {
        let d = ((c ^ x) & !erased).count_ones() as usize;
        if 2 * d + s < dmin {
            if found.is_some() {
                return Err(format!("two codewords inside the radius of {x:#x}"));
            }
            found = Some(c);
        }
    }
    Ok(found)
}

/// BDD against the oracle on every input word. Returns how many inputs
/// decoded.
pub fn bdd_exhaustive(code: &BchCode) -> Result<usize, String> {
    let n = code.n();
    let book = codebook(code);
    let mut decoded = 0;
    for x in 0..1u32 << n {
        let got = code.bdd_decode(&to_bits(x, n)).map_err(|e| e.to_string())?;
        // BDD radius t is floor((dmin - 1) / 2) for non-extended codes
        let want = nearest(&book, x, 0, 2 * code.t() + 1, 0)?;
        match (got.bits(), want) {
            (Some(b), Some(w)) if to_mask(&b) == w => decoded += 1,
            (None, None) => {}
            (g, w) => return Err(format!("input {x:#x}: decoder {g:?}, oracle {w:?}")),
        }
    }
    Ok(decoded)
}

/// EED against the oracle on `trials` random words near the code with
/// random erasure sets of size `< dmin`. Returns `[decoded, failed]`.
pub fn eed_sampled(code: &BchCode, trials: usize, seed: u64) -> Result<[usize; 2], String> {
    let n = code.n();
    let dmin = code.dmin();
    let book = codebook(code);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = [0usize; 2];
    for _ in 0..trials {
        // biased towards the code so both outcomes occur
        let c = book[rng.random_range(0..book.len())];
        let noise = to_mask(&(0..n).map(|_| rng.random_bool(0.12) as u8).collect::<Vec<_>>());
        let x = c ^ noise;
        let s = rng.random_range(0..dmin);
        let er: Vec<usize> = sample(&mut rng, n, s).into_vec();
        let erased = er.iter().fold(0u32, |m, &e| m | (1 << e));
        let got = code.eed_decode(&to_bits(x, n), &er).map_err(|e| e.to_string())?;
        let want = nearest(&book, x, erased, dmin, s)?;
        match (got.bits(), want) {
            (Some(b), Some(w)) if to_mask(&b) == w => outcomes[0] += 1,
            (None, None) => outcomes[1] += 1,
            (g, w) => return Err(format!("input {x:#x} erasures {er:?}: decoder {g:?}, oracle {w:?}")),
        }
    }
    Ok(outcomes)
}
