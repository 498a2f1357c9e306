//! The stratified transfer estimate against a direct simulation of one
//! half-iteration: independent input errors, real channel LLRs, BDD and the
//! combining rule, counted bit by bit.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prodec::channel::{transmit, Constellation};
use prodec::codes::CodeId;
use prodec::de::{estimate_g, ComponentStats, Transfer};

/// Returns the output error probability and its batch-means standard error.
fn direct_g(code: &prodec::BchCode, c: &Constellation, sigma: f64, x: f64, w: f64, lines: usize, seed: u64) -> (f64, f64) {
    let n = code.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batches = 40;
    let per = lines / batches;
    let mut means = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut wrong = 0usize;
        for _ in 0..per {
            let cw = code.encode(&common::random_bits(&mut rng, code.k())).unwrap();
            let llr = transmit(&cw, c, sigma, &mut rng).unwrap();
            let input: Vec<u8> = cw.iter().map(|&b| b ^ rng.random_bool(x) as u8).collect();
            let word = code.bdd_decode(&input).unwrap();
            for ((&v, &l), &b) in word.values().iter().zip(&llr).zip(&cw) {
                wrong += (((w * v as f64 + l) < 0.0) as u8 != b) as usize;
            }
        }
        means.push(wrong as f64 / (per * n) as f64);
    }
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

#[test]
fn transfer_matches_direct_half_iteration() {
    let code = CodeId::C2.params().build().unwrap();
    let c = Constellation::new(1).unwrap();
    let rate = (code.k() * code.k()) as f64 / (code.n() * code.n()) as f64;
    let sigma = c.sigma_for_ebn0(4.0, rate).unwrap();
    let stats = ComponentStats::estimate(&code, 4000, 11).unwrap();
    let transfer = Transfer::new(&stats, &c, sigma);
    for (i, (x, w)) in [(0.005, 2.0), (0.01, 3.0), (0.015, 4.0), (0.02, 3.0), (0.03, 1.5)]
        .into_iter()
        .enumerate()
    {
        let est = transfer.sample(x, w).unwrap();
        let (direct, se) = direct_g(&code, &c, sigma, x, w, 4000, 100 + i as u64);
        let tol = 3.0 * (se * se + est.std_err * est.std_err).sqrt();
        assert!(
            (est.x_out - direct).abs() <= tol,
            "x={x} w={w}: estimate {} direct {direct} tol {tol}",
            est.x_out
        );
    }
}

#[test]
fn one_shot_estimate_agrees_with_shared_statistics() {
    let code = CodeId::C2.params().build().unwrap();
    let c = Constellation::new(1).unwrap();
    let sigma = 0.55;
    let a = estimate_g(&code, 0.02, &c, sigma, 3.0, 2000, 5).unwrap();
    let stats = ComponentStats::estimate(&code, 2000, 5).unwrap();
    let b = Transfer::new(&stats, &c, sigma).sample(0.02, 3.0).unwrap();
    assert_eq!(a.x_out, b.x_out);
    assert!(a.ci.0 <= a.x_out && a.x_out <= a.ci.1);
}
