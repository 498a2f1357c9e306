//! Monte-Carlo BER sweeps.
//!
//! Work is split into units: one array for product codes, one stream chunk
//! for staircase codes. Unit `u` at grid point `p` draws everything from
//! `rng::stream(seed, Simulation, p, u)`. Units run in fixed-size batches and
//! the stop rule is checked between batches, so the set of simulated units,
//! and every output byte except the timing column, depends only on the
//! configuration and the seed.
//!
//! A staircase chunk is a fresh stream starting at `B_0`: `W` warm-up blocks
//! whose decisions are discarded, `chunk_blocks` counted blocks, and `W - 1`
//! trailing blocks so that every counted block leaves a full window.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bch::BchCode;
use crate::channel::{transmit, Constellation, LlrGrid};
use crate::codes::{resolve_code, CodeParams, Structure};
use crate::de::{build_lut, build_sr_lut, ComponentStats, LutTarget, ScConfig};
use crate::decoder::{DecodeSchedule, DecoderKind, DecoderStats};
use crate::error::{Error, Result};
use crate::lut::{CombiningLut, LutSet};
use crate::pc::{PcDecoder, ProductCode};
use crate::rng::{stream, Purpose};
use crate::scc::{SccDecoder, StaircaseCode, SweepOrder};

/// Version of the CSV and record layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Columns of the sweep CSV, in order.
pub const CSV_COLUMNS: [&str; 14] = [
    "schema_version",
    "snr_db",
    "bits",
    "bit_errors",
    "ber",
    "block_errors",
    "miscorrections",
    "failures",
    "seconds",
    "seed",
    "units",
    "ci_low",
    "ci_high",
    "max_bits_reached",
];

/// Environment variable overriding the configured master seed.
pub const SEED_ENV: &str = "PRODEC_SEED";

fn default_m() -> u32 {
    1
}
fn default_soft() -> usize {
    10
}
fn default_appended() -> usize {
    2
}
fn default_true() -> bool {
    true
}
fn default_window() -> usize {
    crate::scc::DEFAULT_WINDOW
}
fn default_min_errors() -> u64 {
    100
}
fn default_max_bits() -> u64 {
    1_000_000_000
}
fn default_seed() -> u64 {
    1
}
fn default_batch() -> usize {
    8
}
fn default_chunk() -> usize {
    50
}
fn default_samples() -> usize {
    crate::de::DEFAULT_SAMPLES
}

/// A sweep, read from flat TOML. `code` is `C1`, `C2`, `C3`, a
/// `bch(v=..,t=..,s=..,ext=..)` label, or `custom`, which takes the
/// component from `v`, `t`, `s` and `extended`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub code: String,
    #[serde(default)]
    pub v: Option<u32>,
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub extended: Option<bool>,
    pub structure: Structure,
    pub decoder: DecoderKind,
    /// Bits per real dimension: 1 is bi-AWGN/4-QAM, 2 is 16-QAM, ...
    #[serde(default = "default_m")]
    pub m: u32,
    /// Eb/N0 grid in dB.
    pub snr_db: Vec<f64>,
    #[serde(default = "default_soft")]
    pub soft_iterations: usize,
    #[serde(default = "default_appended")]
    pub appended_iterations: usize,
    #[serde(default = "default_true")]
    pub erasure_branch: bool,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub sweep_order: SweepOrder,
    /// Table file; generated by density evolution when absent.
    #[serde(default)]
    pub lut: Option<PathBuf>,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default = "default_max_bits")]
    pub max_bits: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    #[serde(default)]
    pub workers: usize,
    /// Units per batch between stop-rule checks.
    #[serde(default = "default_batch")]
    pub batch: usize,
    /// Counted blocks per staircase chunk.
    #[serde(default = "default_chunk")]
    pub chunk_blocks: usize,
    /// Trials per stratum when tables are generated.
    #[serde(default = "default_samples")]
    pub de_samples: usize,
    /// Routes BEE-PC messages through the packed wire format.
    #[serde(default)]
    pub packed_messages: bool,
}

impl SweepConfig {
    /// Defaults for everything but the code, structure, decoder and grid.
    pub fn new(code: &str, structure: Structure, decoder: DecoderKind, snr_db: Vec<f64>) -> Self {
        Self {
            code: code.into(),
            v: None,
            t: None,
            s: None,
            extended: None,
            structure,
            decoder,
            m: default_m(),
            snr_db,
            soft_iterations: default_soft(),
            appended_iterations: default_appended(),
            erasure_branch: true,
            window: default_window(),
            sweep_order: SweepOrder::default(),
            lut: None,
            min_errors: default_min_errors(),
            max_bits: default_max_bits(),
            seed: default_seed(),
            workers: 0,
            batch: default_batch(),
            chunk_blocks: default_chunk(),
            de_samples: default_samples(),
            packed_messages: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(lut) = &cfg.lut {
            if lut.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.lut = Some(dir.join(lut));
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies the `PRODEC_SEED` override, if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}={v} is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::Config("empty snr_db grid".into()));
        }
        if self.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("non-finite SNR".into()));
        }
        if self.min_errors == 0 || self.max_bits == 0 {
            return Err(Error::Config("stop rule needs positive min_errors and max_bits".into()));
        }
        if self.batch == 0 || self.chunk_blocks == 0 || self.window == 0 {
            return Err(Error::Config("batch, chunk_blocks and window must be positive".into()));
        }
        if self.m == 0 || self.m > 8 {
            return Err(Error::Config(format!("unsupported m = {}", self.m)));
        }
        self.schedule().validate()?;
        self.component_params()?;
        Ok(())
    }

    pub fn schedule(&self) -> DecodeSchedule {
        DecodeSchedule {
            soft_iterations: self.soft_iterations,
            appended_iterations: self.appended_iterations,
            erasure_branch: self.erasure_branch,
        }
    }

    /// Component parameters. Fixtures used in staircase codes get one bit of
    /// extra shortening when their length is odd.
    pub fn component_params(&self) -> Result<CodeParams> {
        if self.code.eq_ignore_ascii_case("custom") {
            let (Some(v), Some(t)) = (self.v, self.t) else {
                return Err(Error::Config("custom code needs v and t".into()));
            };
            return Ok(CodeParams {
                v,
                t,
                s: self.s.unwrap_or(0),
                extended: self.extended.unwrap_or(false),
            });
        }
        if self.v.is_some() || self.t.is_some() || self.s.is_some() || self.extended.is_some() {
            return Err(Error::Config("v/t/s/extended only apply to code = \"custom\"".into()));
        }
        resolve_code(&self.code, self.structure)
    }

    /// Rate of the configured structure.
    pub fn rate(&self, code: &BchCode) -> f64 {
        match self.structure {
            Structure::Pc => crate::codes::pc_rate(code),
            Structure::Scc => crate::codes::scc_rate(code),
        }
    }
}

/// Result of one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub schema_version: u32,
    pub snr_db: f64,
    pub sigma: f64,
    pub code: String,
    pub structure: Structure,
    pub decoder: DecoderKind,
    pub m: u32,
    /// Information bits counted.
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Arrays (product) or counted blocks (staircase) with an error.
    pub block_errors: u64,
    /// Simulation units: arrays or stream chunks.
    pub units: u64,
    pub stats: DecoderStats,
    /// 95% interval from the spread of per-unit error counts.
    pub ci_low: f64,
    pub ci_high: f64,
    /// The point stopped at `max_bits` before reaching `min_errors`.
    pub max_bits_reached: bool,
    /// With zero errors, the one-sided 95% bound `3 / bits`; else `ber`.
    pub ber_upper_bound: f64,
    pub seconds: f64,
    pub seed: u64,
    pub lut_sigma: Option<f64>,
}

impl fmt::Display for BerRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>6.3} dB  ber {:.3e} [{:.2e}, {:.2e}]  errors {}  bits {}{}",
            self.snr_db,
            self.ber,
            self.ci_low,
            self.ci_high,
            self.bit_errors,
            self.bits,
            if self.max_bits_reached { "  (max bits)" } else { "" }
        )
    }
}

/// Outcome of one unit.
#[derive(Clone, Copy, Debug, Default)]
struct UnitResult {
    bits: u64,
    errors: u64,
    block_errors: u64,
    stats: DecoderStats,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    bits: u64,
    errors: u64,
    block_errors: u64,
    units: u64,
    stats: DecoderStats,
    /// Sum and sum of squares of per-unit error counts (units have equal
    /// sizes).
    sum: f64,
    sum_sq: f64,
    unit_bits: u64,
}

impl Tally {
    fn add(&mut self, r: &UnitResult) {
        self.bits += r.bits;
        self.errors += r.errors;
        self.block_errors += r.block_errors;
        self.units += 1;
        self.stats += r.stats;
        let e = r.errors as f64;
        self.sum += e;
        self.sum_sq += e * e;
        self.unit_bits = r.bits;
    }
}

/// Batch-means 95% interval for the BER from per-unit error counts.
pub fn batch_means_ci(units: u64, sum: f64, sum_sq: f64, unit_bits: u64) -> (f64, f64) {
    if units == 0 || unit_bits == 0 {
        return (0.0, 1.0);
    }
    let u = units as f64;
    let b = unit_bits as f64;
    let mean = sum / u;
    if sum == 0.0 {
        return (0.0, 3.0 / (u * b));
    }
    if units < 2 {
        return (0.0, 1.0);
    }
    let var = ((sum_sq - u * mean * mean) / (u - 1.0)).max(0.0);
    let t = StudentsT::new(0.0, 1.0, u - 1.0)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(1.96);
    let half = t * (var / u).sqrt();
    (((mean - half) / b).max(0.0), ((mean + half) / b).min(1.0))
}

/// What a sweep needs besides the configuration.
struct Setup {
    code: BchCode,
    constellation: Constellation,
    rate: f64,
    luts: Option<LutSet>,
    stats: Option<ComponentStats>,
}

impl Setup {
    fn new(cfg: &SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let code = cfg.component_params()?.build()?;
        if cfg.structure == Structure::Scc {
            StaircaseCode::new(code.clone())?;
        }
        let constellation = Constellation::new(cfg.m)?;
        let rate = cfg.rate(&code);
        let (luts, stats) = if !cfg.decoder.needs_lut() {
            (None, None)
        } else if let Some(path) = &cfg.lut {
            (Some(LutSet::load(path)?), None)
        } else {
            (None, Some(ComponentStats::estimate(&code, cfg.de_samples, cfg.seed)?))
        };
        Ok(Self {
            code,
            constellation,
            rate,
            luts,
            stats,
        })
    }

    fn lut_for(&self, cfg: &SweepConfig, sigma: f64) -> Result<Option<CombiningLut>> {
        if !cfg.decoder.needs_lut() {
            return Ok(None);
        }
        if let Some(set) = &self.luts {
            let lut = set
                .nearest(sigma)
                .ok_or_else(|| Error::MissingLut(cfg.decoder.to_string()))?;
            let label = CodeParams::of(&self.code).to_string();
            if lut.code != label && lut.code != "constant" {
                return Err(Error::Config(format!(
                    "table is for {}, the sweep uses {label}",
                    lut.code
                )));
            }
            return Ok(Some(lut.clone()));
        }
        let stats = self.stats.as_ref().expect("stats built for table decoders");
        let target = match cfg.structure {
            Structure::Pc => LutTarget::Product {
                iterations: cfg.soft_iterations,
            },
            Structure::Scc => LutTarget::Staircase(ScConfig {
                window: cfg.window,
                iterations: cfg.soft_iterations,
                ..ScConfig::default()
            }),
        };
        let lut = if cfg.decoder == DecoderKind::IbddSr {
            build_sr_lut(&self.code, stats, &self.constellation, sigma, target)?
        } else {
            build_lut(&self.code, stats, &self.constellation, sigma, target)?
        };
        Ok(Some(lut))
    }
}

/// Runs every grid point of a sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<BerRecord>> {
    run_sweep_with(cfg, |_| {})
}

/// [`run_sweep`], reporting each record as it completes.
pub fn run_sweep_with(cfg: &SweepConfig, mut progress: impl FnMut(&BerRecord)) -> Result<Vec<BerRecord>> {
    let setup = Setup::new(cfg)?;
    let pool = if cfg.workers > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?,
        )
    } else {
        None
    };
    let mut out = Vec::with_capacity(cfg.snr_db.len());
    for (p, &db) in cfg.snr_db.iter().enumerate() {
        let rec = match &pool {
            Some(pool) => pool.install(|| run_point(cfg, &setup, p as u32, db))?,
            None => run_point(cfg, &setup, p as u32, db)?,
        };
        progress(&rec);
        out.push(rec);
    }
    Ok(out)
}

fn run_point(cfg: &SweepConfig, setup: &Setup, point: u32, db: f64) -> Result<BerRecord> {
    let start = Instant::now();
    let sigma = setup.constellation.sigma_for_ebn0(db, setup.rate)?;
    let lut = setup.lut_for(cfg, sigma)?;
    let schedule = cfg.schedule();
    let mut tally = Tally::default();
    let mut next_unit = 0u64;
    loop {
        let units: Vec<u64> = (next_unit..next_unit + cfg.batch as u64).collect();
        next_unit += cfg.batch as u64;
        let results: Vec<Result<UnitResult>> = match cfg.structure {
            Structure::Pc => {
                let dec = PcDecoder::new(&setup.code, cfg.decoder, schedule, lut.as_ref())?
                    .with_packed_messages(cfg.packed_messages);
                units
                    .par_iter()
                    .map(|&u| pc_unit(cfg, setup, &dec, sigma, point, u))
                    .collect()
            }
            Structure::Scc => {
                let dec = SccDecoder::new(&setup.code, cfg.decoder, schedule, lut.as_ref(), cfg.window)?
                    .with_sweep_order(cfg.sweep_order);
                units
                    .par_iter()
                    .map(|&u| scc_unit(cfg, setup, &dec, sigma, point, u))
                    .collect()
            }
        };
        for r in results {
            tally.add(&r?);
        }
        if tally.errors >= cfg.min_errors || tally.bits >= cfg.max_bits {
            break;
        }
    }
    let ber = tally.errors as f64 / tally.bits as f64;
    let (ci_low, ci_high) = batch_means_ci(tally.units, tally.sum, tally.sum_sq, tally.unit_bits);
    Ok(BerRecord {
        schema_version: SCHEMA_VERSION,
        snr_db: db,
        sigma,
        code: CodeParams::of(&setup.code).to_string(),
        structure: cfg.structure,
        decoder: cfg.decoder,
        m: cfg.m,
        bits: tally.bits,
        bit_errors: tally.errors,
        ber,
        block_errors: tally.block_errors,
        units: tally.units,
        stats: tally.stats,
        ci_low,
        ci_high,
        max_bits_reached: tally.errors < cfg.min_errors,
        ber_upper_bound: if tally.errors == 0 {
            3.0 / tally.bits as f64
        } else {
            ber
        },
        seconds: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
        lut_sigma: lut.map(|l| l.sigma),
    })
}

fn random_bits(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let word: u64 = rng.random();
        let take = (len - out.len()).min(64);
        out.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    out
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

fn pc_unit(
    cfg: &SweepConfig,
    setup: &Setup,
    dec: &PcDecoder<'_>,
    sigma: f64,
    point: u32,
    unit: u64,
) -> Result<UnitResult> {
    let pc = ProductCode::new(setup.code.clone());
    let mut rng = stream(cfg.seed, Purpose::Simulation, point, unit);
    let info = random_bits(&mut rng, pc.info_len());
    let block = pc.encode(&info)?;
    let llr = transmit(block.bits(), &setup.constellation, sigma, &mut rng)?;
    let n = pc.n();
    let grid = LlrGrid::new(n, n, llr, sigma)?;
    let out = dec.decode(&grid, Some(block.bits()))?;
    let errors = count_errors(&pc.info_bits(&out.decisions), &info);
    Ok(UnitResult {
        bits: info.len() as u64,
        errors,
        block_errors: (errors > 0) as u64,
        stats: out.stats,
    })
}

fn scc_unit(
    cfg: &SweepConfig,
    setup: &Setup,
    dec: &SccDecoder<'_>,
    sigma: f64,
    point: u32,
    unit: u64,
) -> Result<UnitResult> {
    let sc = StaircaseCode::new(setup.code.clone())?;
    let w = cfg.window;
    let counted = cfg.chunk_blocks;
    let total = 2 * w + counted - 1;
    let mut rng = stream(cfg.seed, Purpose::Simulation, point, unit);
    let info = random_bits(&mut rng, total * sc.block_info_len());
    let blocks = sc.encode_stream(&info)?;
    let mut win = dec.start();
    let mut res = UnitResult::default();
    let first = w as u64 + 1;
    let last = (w + counted) as u64;
    for b in &blocks {
        let llr = transmit(b.bits(), &setup.constellation, sigma, &mut rng)?;
        if let Some(e) = win.push(llr, Some(b.bits().to_vec()))? {
            if (first..=last).contains(&e.index) {
                let tx = &blocks[(e.index - 1) as usize];
                let errors = count_errors(&sc.info_bits(&e.bits), &sc.info_bits(tx.bits()));
                res.bits += sc.block_info_len() as u64;
                res.errors += errors;
                res.block_errors += (errors > 0) as u64;
            }
        }
    }
    res.stats = win.stats();
    Ok(res)
}

/// Writes records as CSV with [`CSV_COLUMNS`].
pub fn write_csv<W: Write>(out: W, records: &[BerRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.schema_version.to_string(),
            r.snr_db.to_string(),
            r.bits.to_string(),
            r.bit_errors.to_string(),
            format!("{:e}", r.ber),
            r.block_errors.to_string(),
            r.stats.miscorrections.to_string(),
            r.stats.failures.to_string(),
            format!("{:.3}", r.seconds),
            r.seed.to_string(),
            r.units.to_string(),
            format!("{:e}", r.ci_low),
            format!("{:e}", r.ci_high),
            r.max_bits_reached.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one JSON object per record and line.
pub fn write_jsonl<W: Write>(mut out: W, records: &[BerRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Horizontal gap (dB) between two BER curves at `ber`, interpolating
/// `log10(BER)` linearly in SNR between the two measured points that
/// straddle it. `None` when a curve does not cross `ber`. Positive when
/// `b` reaches `ber` at a lower SNR than `a`.
pub fn gain_at(a: &[(f64, f64)], b: &[(f64, f64)], ber: f64) -> Option<f64> {
    Some(crossing(a, ber)? - crossing(b, ber)?)
}

/// SNR at which a curve of `(snr_db, ber)` points, sorted by SNR, crosses
/// `ber` (first crossing, log-linear interpolation).
pub fn crossing(curve: &[(f64, f64)], ber: f64) -> Option<f64> {
    let target = ber.log10();
    for w in curve.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= ber && y1 < ber {
            if y1 <= 0.0 {
                return None;
            }
            let (l0, l1) = (y0.log10(), y1.log10());
            return Some(x0 + (target - l0) / (l1 - l0) * (x1 - x0));
        }
    }
    None
}
