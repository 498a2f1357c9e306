//! Shared fixtures and reference implementations for the integration tests
//! and the acceptance runner.
#![allow(dead_code)]

pub mod oracle;

use rand::Rng;

use prodec::channel::{transmit, Constellation, LlrGrid};
use prodec::pc::{PcBlock, ProductCode};
use prodec::BchCode;

pub fn random_bits(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

/// A random product-code array and its channel LLRs.
pub fn noisy_array(
    pc: &ProductCode,
    c: &Constellation,
    sigma: f64,
    rng: &mut impl Rng,
) -> (PcBlock, LlrGrid) {
    let info = random_bits(rng, pc.info_len());
    let block = pc.encode(&info).unwrap();
    let llr = transmit(block.bits(), c, sigma, rng).unwrap();
    let grid = LlrGrid::new(pc.n(), pc.n(), llr, sigma).unwrap();
    (block, grid)
}

fn transpose<T: Copy>(a: &[T], n: usize) -> Vec<T> {
    (0..n * n).map(|p| a[(p % n) * n + p / n]).collect()
}

fn slice(x: f64) -> u8 {
    (x < 0.0) as u8
}

/// Generalised distance written out directly from its definition.
pub fn ref_gd(a: &[u8], b: &[u8], r: &[f64]) -> f64 {
    let max = r.iter().cloned().fold(0.0, f64::max);
    a.iter()
        .zip(b)
        .zip(r)
        .map(|((x, y), &ri)| {
            let alpha = if max > 0.0 { ri / max } else { 0.0 };
            if x == y {
                1.0 - alpha
            } else {
                1.0 + alpha
            }
        })
        .sum()
}

/// Result of the reference decoder: final decisions and the number of
/// wrong decisions after every phase.
pub struct RefOutput {
    pub decisions: Vec<u8>,
    pub trajectory: Vec<u64>,
}

/// BEE-PC with soft messages: every phase hands the next one the combined
/// LLRs `w m + l` of its lines as `f64`, and the receiving decoder slices
/// and ranks them directly. Uses only the public algebraic decoders.
pub fn reference_bee_pc(
    code: &BchCode,
    llr: &LlrGrid,
    weights: &[f64],
    soft: usize,
    appended: usize,
    erasure_branch: bool,
    reference: &[u8],
) -> RefOutput {
    let n = code.n();
    let l = [llr.data().to_vec(), transpose(llr.data(), n)];
    let r = [reference.to_vec(), transpose(reference, n)];
    let mut trajectory = Vec::new();
    // soft message from the previous phase, aligned with the current phase
    let mut msg = l[0].clone();
    let mut psi = vec![0u8; n * n];
    for step in 0..2 * soft {
        let phase = step % 2;
        let w = weights[step];
        let mut out_llr = vec![0.0; n * n];
        for i in 0..n {
            let span = i * n..(i + 1) * n;
            let lin = &msg[span.clone()];
            let ch = &l[phase][span.clone()];
            let input: Vec<u8> = lin.iter().map(|&x| slice(x)).collect();
            let rel: Vec<f64> = lin.iter().map(|x| x.abs()).collect();
            let combine = |word: &prodec::TernaryWord| -> Vec<f64> {
                word.values()
                    .iter()
                    .zip(ch)
                    .map(|(&v, &c)| v as f64 * w + c)
                    .collect()
            };
            let b1 = code.bdd_decode(&input).unwrap();
            let l1 = combine(&b1);
            let p1: Vec<u8> = l1.iter().map(|&x| slice(x)).collect();
            let d1 = if b1.is_decoded() { ref_gd(&p1, &input, &rel) } else { 2.0 * n as f64 };
            let mut chosen = l1;
            if erasure_branch {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| rel[a].total_cmp(&rel[b]).then(a.cmp(&b)));
                let b2 = code.eed_decode(&input, &order[..2]).unwrap();
                if b2.is_decoded() {
                    let l2 = combine(&b2);
                    let p2: Vec<u8> = l2.iter().map(|&x| slice(x)).collect();
                    if d1 > ref_gd(&p2, &input, &rel) {
                        chosen = l2;
                    }
                }
            }
            out_llr[span].copy_from_slice(&chosen);
        }
        for (p, &x) in psi.iter_mut().zip(&out_llr) {
            *p = slice(x);
        }
        trajectory.push(psi.iter().zip(&r[phase]).filter(|(a, b)| a != b).count() as u64);
        msg = transpose(&out_llr, n);
    }
    let mut psi = if soft == 0 { l[0].iter().map(|&x| slice(x)).collect() } else { transpose(&psi, n) };
    for step in 0..2 * appended {
        let phase = step % 2;
        for i in 0..n {
            let line = &mut psi[i * n..(i + 1) * n];
            let word = code.bdd_decode(line).unwrap();
            if let Some(bits) = word.bits() {
                line.copy_from_slice(&bits);
            }
        }
        trajectory.push(psi.iter().zip(&r[phase]).filter(|(a, b)| a != b).count() as u64);
        psi = transpose(&psi, n);
    }
    RefOutput {
        decisions: psi,
        trajectory,
    }
}

/// Counts of trials where a decoder missed a pattern inside its guaranteed
/// radius.
#[derive(Debug, Default, Clone, Copy)]
pub struct GuaranteeMisses {
    pub bdd: usize,
    pub eed: usize,
}

/// `trials` random codewords with `e <= t` errors for BDD, and `e` errors
/// plus `s` erasures with `2e + s <= dmin - 1` for EED (erasures placed on
/// random positions, some of them on errors).
pub fn guarantee_trials(code: &BchCode, trials: usize, seed: u64) -> GuaranteeMisses {
    use rand::seq::index::sample;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = code.n();
    let t = code.t();
    let dmin = code.dmin();
    let mut misses = GuaranteeMisses::default();
    for _ in 0..trials {
        let info = random_bits(&mut rng, code.k());
        let cw = code.encode(&info).unwrap();

        let e = rng.random_range(0..=t);
        let mut rx = cw.clone();
        for p in sample(&mut rng, n, e) {
            rx[p] ^= 1;
        }
        if code.bdd_decode(&rx).unwrap().bits().as_deref() != Some(&cw[..]) {
            misses.bdd += 1;
        }

        let s = rng.random_range(0..dmin);
        let e = rng.random_range(0..=(dmin - 1 - s) / 2);
        let pos = sample(&mut rng, n, e + s).into_vec();
        let mut rx = cw.clone();
        // the first e positions are errors; erasures hit the rest, and with
        // a coin flip one erased bit is also flipped
        for &p in &pos[..e] {
            rx[p] ^= 1;
        }
        let erased = &pos[e..];
        if let Some(&p) = erased.first() {
            if rng.random_bool(0.5) {
                rx[p] ^= 1;
            }
        }
        if code.eed_decode(&rx, erased).unwrap().bits().as_deref() != Some(&cw[..]) {
            misses.eed += 1;
        }
    }
    misses
}
