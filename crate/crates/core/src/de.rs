//! Density evolution for iBDD-CR on the GLDPC ensemble (product codes) and
//! the windowed spatially-coupled ensemble (staircase codes), plus table
//! generation and threshold search.
//!
//! The component transfer function `g(x, w)` is estimated by Monte-Carlo with
//! the real BCH decoder, stratified over the number `e` of wrong input
//! decisions: for each `e` the decoder is run on random weight-`e` patterns
//! of the all-zero word, giving `P(failure | e)` and the expected fraction of
//! wrong bits after a successful decode. Input errors are independent of the
//! channel LLR, and the output bit is `B(w mu + L)` with `L` drawn from the
//! symmetrised channel LLR law:
//!
//! ```text
//! g(x, w) = sum_e Binom(n, e; x) [ P_fail(e) F(0)
//!           + P_dec(e) ((1 - q_e) F(-w) + q_e F(w)) ]
//! ```
//!
//! with `F(y) = P(L < y)` and `q_e` the wrong-bit fraction. The weight of an
//! iteration is `ln(p_c / p_e)` where `p_e` is the probability that a bit of
//! a decoded word is wrong.

use std::io::Write;

use rand::seq::index::sample as sample_index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::bch::BchCode;
use crate::channel::{Constellation, LlrDistribution};
use crate::codes::CodeParams;
use crate::error::{Error, Result};
use crate::lut::{CombiningLut, W_MAX};
use crate::rng::{stream, Purpose};

/// Monte-Carlo trials per error-count stratum.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Residual message error probability below which DE counts as converged.
pub const DEFAULT_TARGET: f64 = 1e-5;

/// Largest input error probability the strata are sized for. Mass beyond the
/// last stratum is folded into it.
pub const DEFAULT_X_MAX: f64 = 0.15;

#[derive(Clone, Copy, Debug, Default)]
struct Stratum {
    /// `P(failure | e)`.
    fail: f64,
    /// `E[1{decoded} W / n | e]`, `W` the number of wrong bits after decoding.
    wrong: f64,
    /// Second moment of the same quantity.
    wrong_sq: f64,
}

/// Decoder statistics per number of input errors.
#[derive(Clone, Debug)]
pub struct ComponentStats {
    n: usize,
    strata: Vec<Stratum>,
    /// Trials per Monte-Carlo stratum; strata with `e <= t` are exact.
    samples: usize,
    t: usize,
    ln_binom: Vec<f64>,
}

/// Probabilities of the component outcome at input error probability `x`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OutcomeMass {
    pub failure: f64,
    pub decoded: f64,
    /// Probability that a given bit is wrong after a successful decode,
    /// unconditioned (a joint probability).
    pub decoded_wrong: f64,
}

impl OutcomeMass {
    fn add(&mut self, o: OutcomeMass) {
        self.failure += o.failure;
        self.decoded += o.decoded;
        self.decoded_wrong += o.decoded_wrong;
    }
}

impl ComponentStats {
    pub fn estimate(code: &BchCode, samples: usize, seed: u64) -> Result<Self> {
        Self::estimate_up_to(code, DEFAULT_X_MAX, samples, seed)
    }

    /// Sizes the strata for input error probabilities up to `x_max`.
    pub fn estimate_up_to(code: &BchCode, x_max: f64, samples: usize, seed: u64) -> Result<Self> {
        check_probability(x_max)?;
        if samples == 0 {
            return Err(Error::InvalidParameters("need at least one sample".into()));
        }
        let n = code.n();
        let t = code.t();
        let nf = n as f64;
        let sd = (nf * x_max * (1.0 - x_max)).sqrt();
        let e_max = ((nf * x_max + 8.0 * sd).ceil() as usize + t + 1).min(n);
        let strata: Vec<Stratum> = (0..=e_max)
            .into_par_iter()
            .map(|e| {
                if e <= t {
                    return Stratum::default();
                }
                let mut rng = stream(seed, Purpose::DensityEvolution, 0, e as u64);
                let mut acc = Stratum::default();
                let mut ones = vec![0usize; e];
                let mut mark = vec![false; n];
                for _ in 0..samples {
                    for (o, i) in ones.iter_mut().zip(sample_index(&mut rng, n, e)) {
                        *o = i;
                    }
                    match code.bdd_flips_sparse(&ones) {
                        None => acc.fail += 1.0,
                        Some(flips) => {
                            for &i in &ones {
                                mark[i] = true;
                            }
                            for &f in &flips {
                                mark[f] ^= true;
                            }
                            let mut w = 0usize;
                            for &i in ones.iter().chain(&flips) {
                                if mark[i] {
                                    w += 1;
                                    mark[i] = false;
                                }
                            }
                            let q = w as f64 / nf;
                            acc.wrong += q;
                            acc.wrong_sq += q * q;
                        }
                    }
                }
                let s = samples as f64;
                Stratum {
                    fail: acc.fail / s,
                    wrong: acc.wrong / s,
                    wrong_sq: acc.wrong_sq / s,
                }
            })
            .collect();
        let ln_binom = (0..=n).map(|e| ln_binomial(n as u64, e as u64)).collect();
        Ok(Self {
            n,
            strata,
            samples,
            t,
            ln_binom,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `P(failure | e)`; counts beyond the last stratum use the last one.
    pub fn failure_probability(&self, e: usize) -> f64 {
        self.stratum(e).fail
    }

    fn stratum(&self, e: usize) -> &Stratum {
        &self.strata[e.min(self.strata.len() - 1)]
    }

    /// Calls `f(stratum, mass)` for every stratum with nonzero binomial mass
    /// at input error probability `x`.
    fn for_each_mass(&self, x: f64, mut f: impl FnMut(usize, &Stratum, f64)) {
        let n = self.n;
        let last = self.strata.len() - 1;
        if x <= 0.0 {
            f(0, &self.strata[0], 1.0);
            return;
        }
        if x >= 1.0 {
            f(n, self.stratum(n), 1.0);
            return;
        }
        let (lx, l1x) = (x.ln(), (-x).ln_1p());
        let mut tail = 0.0;
        for e in 0..=n {
            let lp = self.ln_binom[e] + e as f64 * lx + (n - e) as f64 * l1x;
            if lp < -745.0 {
                continue;
            }
            let p = lp.exp();
            if e < last {
                f(e, &self.strata[e], p);
            } else {
                tail += p;
            }
        }
        if tail > 0.0 {
            f(last, &self.strata[last], tail);
        }
    }

    pub fn outcome_mass(&self, x: f64) -> OutcomeMass {
        let mut m = OutcomeMass::default();
        self.for_each_mass(x, |_, s, p| {
            m.failure += p * s.fail;
            m.decoded += p * (1.0 - s.fail);
            m.decoded_wrong += p * s.wrong;
        });
        m
    }

    /// Number of strata estimated by simulation.
    pub fn simulated_strata(&self) -> usize {
        self.strata.len().saturating_sub(self.t + 1)
    }
}

fn check_probability(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::InvalidProbability(x));
    }
    Ok(())
}

/// One estimate of `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSample {
    pub x_in: f64,
    pub sigma: f64,
    pub m: u32,
    pub weight: f64,
    pub x_out: f64,
    pub std_err: f64,
    /// 95% confidence interval, clipped to `[0, 1]`.
    pub ci: (f64, f64),
    /// Trials per simulated stratum.
    pub samples: usize,
}

/// A weight choice and whether it hit the clamp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightChoice {
    pub w: f64,
    pub clamped: bool,
}

/// `ln(p_c / p_e)` from the decoded mass, clamped to `[0, W_MAX]`.
pub fn log_ratio_weight(mass: OutcomeMass) -> WeightChoice {
    if mass.decoded <= 0.0 {
        return WeightChoice { w: 0.0, clamped: false };
    }
    let pe = (mass.decoded_wrong / mass.decoded).clamp(0.0, 1.0);
    let pc = 1.0 - pe;
    if pe <= 0.0 {
        return WeightChoice { w: W_MAX, clamped: true };
    }
    let w = (pc / pe).ln();
    if w > W_MAX {
        WeightChoice { w: W_MAX, clamped: true }
    } else {
        WeightChoice { w: w.max(0.0), clamped: false }
    }
}

/// `g` at one channel parameter.
#[derive(Clone, Debug)]
pub struct Transfer<'s> {
    stats: &'s ComponentStats,
    dist: LlrDistribution,
    sigma: f64,
    m: u32,
}

impl<'s> Transfer<'s> {
    pub fn new(stats: &'s ComponentStats, constellation: &Constellation, sigma: f64) -> Self {
        Self {
            stats,
            dist: LlrDistribution::new(constellation, sigma),
            sigma,
            m: constellation.bits_per_dimension(),
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Channel hard-decision error probability, the initial DE state.
    pub fn p_ch(&self) -> f64 {
        self.dist.p_ch()
    }

    fn cdfs(&self, w: f64) -> (f64, f64, f64) {
        (self.dist.cdf(0.0), self.dist.cdf(-w), self.dist.cdf(w))
    }

    /// `g(x, w)`.
    pub fn g(&self, x: f64, w: f64) -> f64 {
        let (f0, fm, fp) = self.cdfs(w);
        let mut out = 0.0;
        self.stats.for_each_mass(x, |_, s, p| {
            out += p * (s.fail * f0 + (1.0 - s.fail) * fm + s.wrong * (fp - fm));
        });
        out.clamp(0.0, 1.0)
    }

    /// `g(x, w)` with its Monte-Carlo standard error.
    pub fn sample(&self, x: f64, w: f64) -> Result<TransferSample> {
        check_probability(x)?;
        let (f0, fm, fp) = self.cdfs(w);
        let (a, b) = (f0 - fm, fp - fm);
        let ns = self.stats.samples as f64;
        let t = self.stats.t;
        let mut out = 0.0;
        let mut var = 0.0;
        self.stats.for_each_mass(x, |e, s, p| {
            out += p * (s.fail * f0 + (1.0 - s.fail) * fm + s.wrong * b);
            if e > t {
                let v = a * a * s.fail * (1.0 - s.fail)
                    + b * b * (s.wrong_sq - s.wrong * s.wrong)
                    - 2.0 * a * b * s.fail * s.wrong;
                var += p * p * v.max(0.0) / ns;
            }
        });
        let x_out = out.clamp(0.0, 1.0);
        let se = var.sqrt();
        Ok(TransferSample {
            x_in: x,
            sigma: self.sigma,
            m: self.m,
            weight: w,
            x_out,
            std_err: se,
            ci: ((x_out - 1.96 * se).max(0.0), (x_out + 1.96 * se).min(1.0)),
            samples: self.stats.samples,
        })
    }

    /// Log-ratio weight for a single input error probability.
    pub fn optimal_weight(&self, x: f64) -> WeightChoice {
        log_ratio_weight(self.stats.outcome_mass(x))
    }

    /// Log-ratio weight pooled over several constraint-node inputs.
    pub fn pooled_weight(&self, xs: &[f64]) -> WeightChoice {
        let mut m = OutcomeMass::default();
        for &x in xs {
            m.add(self.stats.outcome_mass(x));
        }
        log_ratio_weight(m)
    }
}

/// Estimates `g(x_in, w)` from scratch at one channel parameter.
pub fn estimate_g(
    code: &BchCode,
    x_in: f64,
    constellation: &Constellation,
    sigma: f64,
    w: f64,
    samples: usize,
    seed: u64,
) -> Result<TransferSample> {
    check_probability(x_in)?;
    let stats = ComponentStats::estimate_up_to(code, x_in.max(DEFAULT_X_MAX), samples, seed)?;
    Transfer::new(&stats, constellation, sigma).sample(x_in, w)
}

/// How the weight of each DE step is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightRule {
    /// Log-ratio of the current decoded-bit statistics.
    LogRatio,
    /// The same weight at every step.
    Constant(f64),
}

/// Message error probabilities of the uncoupled recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct GldpcTrajectory {
    /// `x[0] = p_ch`, then one entry per step.
    pub x: Vec<f64>,
    /// Weight used at each step.
    pub weights: Vec<f64>,
    /// Steps whose weight hit the clamp.
    pub clamped: Vec<usize>,
}

impl GldpcTrajectory {
    pub fn residual(&self) -> f64 {
        *self.x.last().unwrap()
    }
}

/// `x <- g(x)` from `p_ch`, `steps` times. For a product code one step is
/// one row or column phase.
pub fn de_gldpc(transfer: &Transfer<'_>, steps: usize, rule: WeightRule) -> GldpcTrajectory {
    let mut x = vec![transfer.p_ch()];
    let mut weights = Vec::with_capacity(steps);
    let mut clamped = Vec::new();
    for step in 0..steps {
        let cur = *x.last().unwrap();
        let choice = match rule {
            WeightRule::LogRatio => transfer.optimal_weight(cur),
            WeightRule::Constant(w) => WeightChoice { w, clamped: false },
        };
        if choice.clamped {
            clamped.push(step);
        }
        weights.push(choice.w);
        x.push(transfer.g(cur, choice.w));
    }
    GldpcTrajectory { x, weights, clamped }
}

/// Update order of the coupled recursion within one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScSchedule {
    /// Window positions updated oldest to newest, each update reading the
    /// values already refreshed in the same iteration, like the window
    /// decoder's sweep over block pairs.
    #[default]
    Sweep,
    /// All window positions updated from the previous iteration's state.
    Parallel,
}

/// Chain and window of the coupled recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScConfig {
    /// Number of coupled positions, not counting the boundary position 0.
    pub positions: usize,
    pub window: usize,
    /// Iterations per window position.
    pub iterations: usize,
    #[serde(default)]
    pub schedule: ScSchedule,
}

impl Default for ScConfig {
    fn default() -> Self {
        Self {
            positions: 50,
            window: 7,
            iterations: 10,
            schedule: ScSchedule::Sweep,
        }
    }
}

impl ScConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window > self.positions {
            return Err(Error::InconsistentWindow(format!(
                "window {} over {} positions",
                self.window, self.positions
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InconsistentWindow("no iterations per window".into()));
        }
        Ok(())
    }
}

/// One iteration of the coupled recursion over the positions marked
/// `active`. Inactive positions read as 0 and come out as 0. Position 0 is
/// the known boundary and may not be active. `g(c, x)` is the transfer
/// function of constraint position `c`, which joins positions `c - 1` and
/// `c`.
pub fn sc_update(x: &[f64], active: &[bool], g: impl Fn(usize, f64) -> f64) -> Result<Vec<f64>> {
    if x.len() != active.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: active.len(),
        });
    }
    if active.first() == Some(&true) {
        return Err(Error::InconsistentWindow("boundary position 0 is pinned".into()));
    }
    let xw = |i: usize| if i < x.len() && active[i] { x[i] } else { 0.0 };
    let mut out = vec![0.0; x.len()];
    for i in 1..x.len() {
        if active[i] {
            let left = g(i, (xw(i - 1) + x[i]) / 2.0);
            let right = g(i + 1, (x[i] + xw(i + 1)) / 2.0);
            out[i] = ((left + right) / 2.0).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

/// State after one iteration at one window position.
#[derive(Clone, Debug, PartialEq)]
pub struct ScStep {
    /// First position of the window.
    pub window_start: usize,
    pub iteration: usize,
    /// Weight of each constraint position `window_start..=window_start + W`.
    pub weights: Vec<f64>,
    /// State over positions `0..=positions`.
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScTrajectory {
    pub config: ScConfig,
    pub history: Vec<ScStep>,
    /// Value of each position when it left the window (index 0 unused).
    pub emitted: Vec<f64>,
    /// Decoded-bit statistics per iteration and window pair, summed over
    /// steady-state window positions.
    pooled: Vec<Vec<OutcomeMass>>,
}

impl ScTrajectory {
    /// Worst emitted value over the positions that left a full window.
    pub fn residual(&self) -> f64 {
        let last = self.config.positions - self.config.window + 1;
        self.emitted[1..=last].iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Weights per iteration and window pair (oldest pair first), pooled
    /// over the steady-state window positions.
    pub fn pooled_weights(&self) -> Vec<Vec<WeightChoice>> {
        self.pooled
            .iter()
            .map(|row| row.iter().map(|&m| log_ratio_weight(m)).collect())
            .collect()
    }

    /// `(position, iteration, x)` rows: the state of every position after
    /// every iteration, iterations counted globally.
    pub fn rows(&self) -> Vec<(usize, usize, f64)> {
        let mut rows = Vec::new();
        for (k, step) in self.history.iter().enumerate() {
            for (i, &x) in step.x.iter().enumerate().skip(1) {
                rows.push((i, k, x));
            }
        }
        rows
    }
}

/// The coupled recursion with a sliding window: positions enter at `p_ch`,
/// each window position runs `iterations` updates, then the oldest position
/// is emitted. With [`WeightRule::LogRatio`] every constraint position gets
/// the log-ratio weight of its own input.
pub fn de_scgldpc(transfer: &Transfer<'_>, config: ScConfig, rule: WeightRule) -> Result<ScTrajectory> {
    config.validate()?;
    let ScConfig {
        positions: l,
        window: w,
        iterations,
        schedule,
    } = config;
    let p_ch = transfer.p_ch();
    let mut x = vec![0.0; l + 1];
    let mut emitted = vec![0.0; l + 1];
    let mut history = Vec::new();
    let mut pooled = vec![vec![OutcomeMass::default(); w]; iterations];
    let last_start = l - w + 1;
    // window positions away from both chain ends; all of them on short chains
    let (lo, hi) = (w + 1, last_start.saturating_sub(w));
    let steady = |s: usize| lo > hi || (lo..=hi).contains(&s);
    for s in 1..=last_start {
        let mut active = vec![false; l + 1];
        for (i, a) in active.iter_mut().enumerate().skip(s).take(w) {
            *a = true;
            if s == 1 || i == s + w - 1 {
                x[i] = p_ch;
            }
        }
        for it in 0..iterations {
            let weight = |mass: OutcomeMass| match rule {
                WeightRule::LogRatio => log_ratio_weight(mass).w,
                WeightRule::Constant(v) => v,
            };
            let mut weights = Vec::with_capacity(w + 1);
            match schedule {
                ScSchedule::Parallel => {
                    let xw = |i: usize| if i <= l && active[i] { x[i] } else { 0.0 };
                    for (p, c) in (s..=s + w).enumerate() {
                        let mass = transfer.stats.outcome_mass((xw(c - 1) + xw(c)) / 2.0);
                        if p < w && steady(s) {
                            pooled[it][p].add(mass);
                        }
                        weights.push(weight(mass));
                    }
                    let next = sc_update(&x, &active, |c, v| transfer.g(v, weights[c - s]))?;
                    x[s..s + w].copy_from_slice(&next[s..s + w]);
                }
                ScSchedule::Sweep => {
                    for i in s..s + w {
                        let xw = |j: usize| if j <= l && active[j] { x[j] } else { 0.0 };
                        let left = (xw(i - 1) + x[i]) / 2.0;
                        let right = (x[i] + xw(i + 1)) / 2.0;
                        let (ml, mr) = (transfer.stats.outcome_mass(left), transfer.stats.outcome_mass(right));
                        if steady(s) {
                            pooled[it][i - s].add(ml);
                        }
                        let (wl, wr) = (weight(ml), weight(mr));
                        weights.push(wl);
                        if i == s + w - 1 {
                            weights.push(wr);
                        }
                        x[i] = ((transfer.g(left, wl) + transfer.g(right, wr)) / 2.0).clamp(0.0, 1.0);
                    }
                }
            }
            let mut snapshot = x.clone();
            for (v, &a) in snapshot.iter_mut().zip(&active) {
                if !a {
                    *v = 0.0;
                }
            }
            history.push(ScStep {
                window_start: s,
                iteration: it,
                weights,
                x: snapshot,
            });
        }
        emitted[s] = x[s];
        if s == last_start {
            emitted[s..=l].copy_from_slice(&x[s..=l]);
        }
    }
    Ok(ScTrajectory {
        config,
        history,
        emitted,
        pooled,
    })
}

/// Structure a table is generated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LutTarget {
    /// One weight per row or column phase of a product decoder.
    Product { iterations: usize },
    /// One weight per sweep of a staircase window decoder.
    Staircase(ScConfig),
}

/// Generates the combining table of iBDD-CR / BEE at channel parameter
/// `sigma`.
pub fn build_lut(
    code: &BchCode,
    stats: &ComponentStats,
    constellation: &Constellation,
    sigma: f64,
    target: LutTarget,
) -> Result<CombiningLut> {
    let transfer = Transfer::new(stats, constellation, sigma);
    let label = CodeParams::of(code).to_string();
    let m = constellation.bits_per_dimension();
    match target {
        LutTarget::Product { iterations } => {
            let tr = de_gldpc(&transfer, 2 * iterations, WeightRule::LogRatio);
            let mut lut = CombiningLut::new(label, sigma, m, tr.weights)?;
            lut.clamped = tr.clamped;
            Ok(lut)
        }
        LutTarget::Staircase(cfg) => {
            let tr = de_scgldpc(&transfer, cfg, WeightRule::LogRatio)?;
            let choices: Vec<WeightChoice> = tr.pooled_weights().into_iter().flatten().collect();
            let weights = choices.iter().map(|c| c.w).collect();
            let mut lut = CombiningLut::window_pairs(label, sigma, m, cfg.window, weights)?;
            lut.clamped = choices
                .iter()
                .enumerate()
                .filter(|(_, c)| c.clamped)
                .map(|(i, _)| i)
                .collect();
            Ok(lut)
        }
    }
}

/// The constant weight (on a 0.25 grid up to `W_MAX`) that minimises the
/// final DE residual, and the table holding it.
pub fn build_sr_lut(
    code: &BchCode,
    stats: &ComponentStats,
    constellation: &Constellation,
    sigma: f64,
    target: LutTarget,
) -> Result<CombiningLut> {
    let transfer = Transfer::new(stats, constellation, sigma);
    let mut best = (f64::INFINITY, 0.0);
    let mut w = 0.0;
    while w <= W_MAX {
        let r = match target {
            LutTarget::Product { iterations } => {
                de_gldpc(&transfer, 2 * iterations, WeightRule::Constant(w)).residual()
            }
            LutTarget::Staircase(cfg) => de_scgldpc(&transfer, cfg, WeightRule::Constant(w))?.residual(),
        };
        if r < best.0 {
            best = (r, w);
        }
        w += 0.25;
    }
    let iterations = match target {
        LutTarget::Product { iterations } => iterations,
        LutTarget::Staircase(cfg) => cfg.iterations,
    };
    let mut lut = CombiningLut::constant(best.1, iterations);
    lut.code = CodeParams::of(code).to_string();
    lut.sigma = sigma;
    lut.m = constellation.bits_per_dimension();
    Ok(lut)
}

/// Smallest Eb/N0 (dB) within `tol_db` at which `residual(db)` falls below
/// `target`, by bisection on `[lo_db, hi_db]`. `residual` is assumed
/// non-increasing in SNR.
pub fn threshold_search(
    mut residual: impl FnMut(f64) -> Result<f64>,
    target: f64,
    lo_db: f64,
    hi_db: f64,
    tol_db: f64,
) -> Result<f64> {
    if !(tol_db > 0.0) {
        return Err(Error::InvalidParameters(format!("tolerance {tol_db} dB")));
    }
    if !(lo_db < hi_db) {
        return Err(Error::BracketFailure(format!("empty bracket [{lo_db}, {hi_db}]")));
    }
    if residual(hi_db)? >= target {
        return Err(Error::BracketFailure(format!("no convergence at {hi_db} dB")));
    }
    if residual(lo_db)? < target {
        return Err(Error::BracketFailure(format!("already converged at {lo_db} dB")));
    }
    let (mut lo, mut hi) = (lo_db, hi_db);
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if residual(mid)? < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Recursion a threshold refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recursion {
    /// Uncoupled ensemble, `steps` phases.
    Gldpc { steps: usize },
    Coupled(ScConfig),
}

/// Final residual of a recursion at Eb/N0 `db` for a code of rate `rate`.
pub fn residual_at(
    stats: &ComponentStats,
    constellation: &Constellation,
    rate: f64,
    recursion: Recursion,
    rule: WeightRule,
    db: f64,
) -> Result<f64> {
    let sigma = constellation.sigma_for_ebn0(db, rate)?;
    let transfer = Transfer::new(stats, constellation, sigma);
    Ok(match recursion {
        Recursion::Gldpc { steps } => de_gldpc(&transfer, steps, rule).residual(),
        Recursion::Coupled(cfg) => de_scgldpc(&transfer, cfg, rule)?.residual(),
    })
}

/// Writes `(position, iteration, x)` rows as CSV with a header.
pub fn write_trajectory_csv<W: Write>(out: W, rows: &[(usize, usize, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["position", "iteration", "x"]).map_err(csv_err)?;
    for &(p, i, x) in rows {
        w.write_record([p.to_string(), i.to_string(), format!("{x:e}")])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of an uncoupled trajectory (position 0).
pub fn gldpc_rows(tr: &GldpcTrajectory) -> Vec<(usize, usize, f64)> {
    tr.x.iter().enumerate().map(|(i, &x)| (0, i, x)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
