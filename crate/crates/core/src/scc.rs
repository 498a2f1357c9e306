//! Staircase codes: stream encoding and the sliding-window decoders.
//!
//! Blocks are `h x h` with `h = n/2`, row-major. Row `j` of block `B_i` is
//! `[info (k - h) | parity (n - k)]`, and `[column j of B_{i-1}, row j of B_i]`
//! is a codeword of the component code. `B_0` is all-zero.
//!
//! The window holds `W` received blocks plus the last emitted block, which is
//! frozen: its decisions never change and its LLRs are pinned to a large
//! magnitude. Each iteration sweeps the `W` block pairs `(prev, cur)` of the
//! window and updates every row of `[prev^T, cur]`.

use std::collections::VecDeque;

use crate::bch::{BchCode, DecodeStatus};
use crate::decoder::{
    check_lut, two_branch_update, Branch, DecodeSchedule, DecoderKind, DecoderStats, LineScratch,
    LineUpdate, Reliability,
};
use crate::error::{Error, Result};
use crate::lut::{CombiningLut, W_MAX};
use crate::soft::hard_map;

/// Magnitude of the LLRs of frozen and known bits.
pub const PINNED_LLR: f64 = 1e3;

const _: () = assert!(PINNED_LLR > 4.0 * W_MAX);

/// Default window size in blocks.
pub const DEFAULT_WINDOW: usize = 7;

#[derive(Clone, Debug)]
pub struct StaircaseCode {
    code: BchCode,
    h: usize,
}

/// One staircase block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaircaseBlock {
    pub index: u64,
    bits: Vec<u8>,
}

impl StaircaseBlock {
    /// The all-zero `B_0`.
    pub fn zero(h: usize) -> Self {
        Self {
            index: 0,
            bits: vec![0; h * h],
        }
    }

    pub fn from_bits(index: u64, h: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != h * h {
            return Err(Error::LengthMismatch {
                expected: h * h,
                actual: bits.len(),
            });
        }
        Ok(Self { index, bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }
}

impl StaircaseCode {
    /// Fails when the component length is odd; shorten by one bit first.
    pub fn new(code: BchCode) -> Result<Self> {
        let n = code.n();
        if n % 2 != 0 {
            return Err(Error::InvalidParameters(format!(
                "staircase codes need an even component length, got {n}"
            )));
        }
        let h = n / 2;
        if code.k() <= h {
            return Err(Error::InvalidParameters(format!(
                "component rate too low for a staircase code: k = {} <= n/2",
                code.k()
            )));
        }
        Ok(Self { code, h })
    }

    pub fn component(&self) -> &BchCode {
        &self.code
    }

    /// Block side `n/2`.
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn rate(&self) -> f64 {
        crate::codes::scc_rate(&self.code)
    }

    /// Information bits per block, `h (k - h)`.
    pub fn block_info_len(&self) -> usize {
        self.h * (self.code.k() - self.h)
    }

    /// Parity bits per block, `h (n - k)`.
    pub fn block_parity_len(&self) -> usize {
        self.h * (self.code.n() - self.code.k())
    }

    /// Encodes the block following `prev`.
    pub fn encode_block(&self, prev: &StaircaseBlock, info: &[u8]) -> Result<StaircaseBlock> {
        let (h, k, n) = (self.h, self.code.k(), self.code.n());
        let ki = k - h;
        if info.len() != h * ki {
            return Err(Error::LengthMismatch {
                expected: h * ki,
                actual: info.len(),
            });
        }
        let mut input = vec![0u8; k];
        let mut word = vec![0u8; n];
        let mut bits = vec![0u8; h * h];
        for j in 0..h {
            for r in 0..h {
                input[r] = prev.bits[r * h + j];
            }
            input[h..].copy_from_slice(&info[j * ki..(j + 1) * ki]);
            self.code.encode_into(&input, &mut word);
            bits[j * h..(j + 1) * h].copy_from_slice(&word[h..]);
        }
        Ok(StaircaseBlock {
            index: prev.index + 1,
            bits,
        })
    }

    /// Encodes a stream into `B_1, B_2, ...`. The stream length must be a
    /// multiple of [`Self::block_info_len`].
    pub fn encode_stream(&self, info: &[u8]) -> Result<Vec<StaircaseBlock>> {
        let per = self.block_info_len();
        if info.len() % per != 0 {
            return Err(Error::LengthMismatch {
                expected: info.len().div_ceil(per) * per,
                actual: info.len(),
            });
        }
        let mut prev = StaircaseBlock::zero(self.h);
        let mut out = Vec::with_capacity(info.len() / per);
        for chunk in info.chunks(per) {
            let b = self.encode_block(&prev, chunk)?;
            out.push(b.clone());
            prev = b;
        }
        Ok(out)
    }

    /// Information bits of a block of decisions, row by row.
    pub fn info_bits(&self, bits: &[u8]) -> Vec<u8> {
        let h = self.h;
        let ki = self.code.k() - h;
        (0..h)
            .flat_map(|j| bits[j * h..j * h + ki].iter().copied())
            .collect()
    }

    /// Whether every row of `[prev^T, cur]` is a codeword.
    pub fn pair_is_valid(&self, prev: &StaircaseBlock, cur: &StaircaseBlock) -> bool {
        let h = self.h;
        let mut line = vec![0u8; 2 * h];
        (0..h).all(|j| {
            for r in 0..h {
                line[r] = prev.bits[r * h + j];
            }
            line[h..].copy_from_slice(&cur.bits[j * h..(j + 1) * h]);
            self.code.bdd_flips(&line).is_some_and(|f| f.is_empty())
        })
    }
}

/// Order in which an iteration visits the block pairs of the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOrder {
    #[default]
    OldestFirst,
    NewestFirst,
}

/// iBDD-CR row update: BDD on `psi`, then `psi = B(w mu + l)` with `mu` the
/// decoded word in `+-1` form, or `psi = B(l)` on failure.
pub fn ibdd_cr_scc_row_update(code: &BchCode, psi: &mut [u8], llr: &[f64], w: f64) -> DecodeStatus {
    cr_row(code, psi, llr, w, None).0
}

/// [`ibdd_cr_scc_row_update`], also reporting whether the decoded word
/// differs from `reference`.
fn cr_row(
    code: &BchCode,
    psi: &mut [u8],
    llr: &[f64],
    w: f64,
    reference: Option<&[u8]>,
) -> (DecodeStatus, bool) {
    match code.bdd_flips(psi) {
        Some(flips) => {
            for &f in &flips {
                psi[f] ^= 1;
            }
            let wrong = reference.is_some_and(|r| r != psi);
            for (b, &l) in psi.iter_mut().zip(llr) {
                let mu = if *b == 0 { w } else { -w };
                *b = hard_map(mu + l);
            }
            (DecodeStatus::Decoded, wrong)
        }
        None => {
            for (b, &l) in psi.iter_mut().zip(llr) {
                *b = hard_map(l);
            }
            (DecodeStatus::Failure, false)
        }
    }
}

/// BEE-SCC row update: the better of the BDD branch and the
/// two-erasure branch, both ranked with `|L̄|` of the BDD branch. The first
/// `pinned` positions are known bits.
pub fn bee_scc_row_update(
    code: &BchCode,
    psi: &mut [u8],
    llr: &[f64],
    w: f64,
    pinned: usize,
    erasure_branch: bool,
    scratch: &mut LineScratch,
) -> LineUpdate {
    let n = psi.len();
    let input = psi.to_vec();
    let mut msg = vec![0i8; n];
    two_branch_update(
        code,
        &input,
        llr,
        w,
        Reliability::BddBranch { pinned },
        erasure_branch,
        &mut msg,
        psi,
        scratch,
    )
}

/// A decided block leaving the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedBlock {
    pub index: u64,
    pub bits: Vec<u8>,
}

/// Staircase decoder configuration.
#[derive(Clone, Debug)]
pub struct SccDecoder<'a> {
    code: &'a BchCode,
    kind: DecoderKind,
    schedule: DecodeSchedule,
    lut: Option<&'a CombiningLut>,
    window: usize,
    order: SweepOrder,
}

impl<'a> SccDecoder<'a> {
    pub fn new(
        code: &'a BchCode,
        kind: DecoderKind,
        schedule: DecodeSchedule,
        lut: Option<&'a CombiningLut>,
        window: usize,
    ) -> Result<Self> {
        check_lut(kind, lut, &schedule)?;
        if window == 0 {
            return Err(Error::InvalidParameters("window size must be positive".into()));
        }
        if code.n() % 2 != 0 {
            return Err(Error::InvalidParameters("odd component length".into()));
        }
        Ok(Self {
            code,
            kind,
            schedule,
            lut,
            window,
            order: SweepOrder::OldestFirst,
        })
    }

    pub fn with_sweep_order(mut self, order: SweepOrder) -> Self {
        self.order = order;
        self
    }

    pub fn kind(&self) -> DecoderKind {
        self.kind
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// A fresh window positioned after `B_0`.
    pub fn start(&self) -> DecodingWindow<'_, 'a> {
        let h = self.code.n() / 2;
        DecodingWindow {
            dec: self,
            h,
            slots: VecDeque::with_capacity(self.window),
            frozen: Slot {
                index: 0,
                psi: vec![0; h * h],
                llr: vec![PINNED_LLR; h * h],
                reference: Some(vec![0; h * h]),
            },
            next_index: 1,
            stats: DecoderStats::default(),
            scratch: LineScratch::new(self.code.n()),
        }
    }
}

#[derive(Clone, Debug)]
struct Slot {
    index: u64,
    psi: Vec<u8>,
    llr: Vec<f64>,
    reference: Option<Vec<u8>>,
}

/// Decoder state for one stream.
pub struct DecodingWindow<'d, 'a> {
    dec: &'d SccDecoder<'a>,
    h: usize,
    slots: VecDeque<Slot>,
    frozen: Slot,
    next_index: u64,
    stats: DecoderStats,
    scratch: LineScratch,
}

/// Row update applied to one line.
#[derive(Clone, Copy)]
enum Update {
    Plain { genie: bool },
    Cr,
    Bee,
}

impl DecodingWindow<'_, '_> {
    pub fn stats(&self) -> DecoderStats {
        self.stats
    }

    /// Number of received blocks waiting in the window.
    pub fn pending(&self) -> usize {
        self.slots.len()
    }

    /// Adds the channel LLRs of the next block. Once the window is full it is
    /// decoded and its oldest block emitted. `reference` (the transmitted
    /// block) enables miscorrection counts and is required by the genie.
    pub fn push(&mut self, llr: Vec<f64>, reference: Option<Vec<u8>>) -> Result<Option<EmittedBlock>> {
        let hh = self.h * self.h;
        if llr.len() != hh {
            return Err(Error::LengthMismatch {
                expected: hh,
                actual: llr.len(),
            });
        }
        if let Some(r) = &reference {
            if r.len() != hh {
                return Err(Error::LengthMismatch {
                    expected: hh,
                    actual: r.len(),
                });
            }
        } else if self.dec.kind == DecoderKind::IdealIbdd {
            return Err(Error::InvalidParameters(
                "ideal iBDD needs the transmitted blocks".into(),
            ));
        }
        let psi = llr.iter().map(|&l| hard_map(l)).collect();
        self.slots.push_back(Slot {
            index: self.next_index,
            psi,
            llr,
            reference,
        });
        self.next_index += 1;
        if self.slots.len() < self.dec.window {
            return Ok(None);
        }
        self.decode_window()?;
        Ok(Some(self.emit()))
    }

    /// Decodes and emits the blocks still in the window, the window shrinking
    /// by one block per emission.
    pub fn finish(&mut self) -> Result<Vec<EmittedBlock>> {
        let mut out = Vec::with_capacity(self.slots.len());
        while !self.slots.is_empty() {
            self.decode_window()?;
            out.push(self.emit());
        }
        Ok(out)
    }

    fn emit(&mut self) -> EmittedBlock {
        let slot = self.slots.pop_front().expect("window not empty");
        let bits = slot.psi.clone();
        let llr = slot
            .psi
            .iter()
            .map(|&b| if b == 0 { PINNED_LLR } else { -PINNED_LLR })
            .collect();
        self.frozen = Slot { llr, ..slot };
        EmittedBlock {
            index: self.frozen.index,
            bits,
        }
    }

    fn decode_window(&mut self) -> Result<()> {
        let dec = self.dec;
        let soft = if dec.kind.needs_lut() {
            dec.schedule.soft_iterations
        } else {
            0
        };
        let genie = dec.kind == DecoderKind::IdealIbdd;
        for it in 0..dec.schedule.total() {
            let update = if it < soft {
                if dec.kind == DecoderKind::Bee {
                    Update::Bee
                } else {
                    Update::Cr
                }
            } else {
                Update::Plain { genie }
            };
            let pairs = self.slots.len();
            for p in 0..pairs {
                let p = match dec.order {
                    SweepOrder::OldestFirst => p,
                    SweepOrder::NewestFirst => pairs - 1 - p,
                };
                let w = match update {
                    Update::Plain { .. } => 0.0,
                    _ => dec.lut.expect("checked at construction").pair_weight(it, p)?,
                };
                self.decode_pair(p, update, w);
            }
        }
        Ok(())
    }

    /// Updates every row of `[prev^T, cur]` with `cur = slots[p]`.
    fn decode_pair(&mut self, p: usize, update: Update, w: f64) {
        let h = self.h;
        let n = 2 * h;
        let code = self.dec.code;
        let erasure_branch = self.dec.schedule.erasure_branch;
        let (prev, cur) = if p == 0 {
            (&mut self.frozen, &mut self.slots[0])
        } else {
            let (a, b) = self.slots.as_mut_slices();
            // both halves of the deque may hold the pair; go through indices
            let (prev, cur) = pair_mut(a, b, p - 1, p);
            (prev, cur)
        };
        let pinned = if p == 0 { h } else { 0 };
        let mut line = vec![0u8; n];
        let mut llr = vec![0.0; n];
        let mut reference = vec![0u8; n];
        let have_ref = prev.reference.is_some() && cur.reference.is_some();
        let mut msg = vec![0i8; n];
        let mut input = vec![0u8; n];
        for j in 0..h {
            for r in 0..h {
                line[r] = prev.psi[r * h + j];
                llr[r] = prev.llr[r * h + j];
            }
            line[h..].copy_from_slice(&cur.psi[j * h..(j + 1) * h]);
            llr[h..].copy_from_slice(&cur.llr[j * h..(j + 1) * h]);
            if have_ref {
                let (pr, cr) = (prev.reference.as_ref().unwrap(), cur.reference.as_ref().unwrap());
                for r in 0..h {
                    reference[r] = pr[r * h + j];
                }
                reference[h..].copy_from_slice(&cr[j * h..(j + 1) * h]);
            }
            self.stats.decodes += 1;
            match update {
                Update::Plain { genie } => match code.bdd_flips(&line) {
                    Some(flips) => {
                        input.copy_from_slice(&line);
                        for &f in &flips {
                            line[f] ^= 1;
                        }
                        if have_ref && line != reference {
                            self.stats.miscorrections += 1;
                            if genie {
                                line.copy_from_slice(&input);
                            }
                        }
                    }
                    None => self.stats.failures += 1,
                },
                Update::Cr => {
                    let r = have_ref.then_some(&reference[..]);
                    let (status, wrong) = cr_row(code, &mut line, &llr, w, r);
                    if status == DecodeStatus::Failure {
                        self.stats.failures += 1;
                    }
                    self.stats.miscorrections += wrong as u64;
                }
                Update::Bee => {
                    input.copy_from_slice(&line);
                    let u = two_branch_update(
                        code,
                        &input,
                        &llr,
                        w,
                        Reliability::BddBranch { pinned },
                        erasure_branch,
                        &mut msg,
                        &mut line,
                        &mut self.scratch,
                    );
                    if u.status == DecodeStatus::Failure {
                        self.stats.failures += 1;
                    } else {
                        if u.branch == Branch::Erasure {
                            self.stats.erasure_selected += 1;
                        }
                        if have_ref
                            && msg.iter().zip(&reference).any(|(&v, &r)| (v < 0) as u8 != r)
                        {
                            self.stats.miscorrections += 1;
                        }
                    }
                }
            }
            if p != 0 {
                for r in 0..h {
                    prev.psi[r * h + j] = line[r];
                }
            }
            cur.psi[j * h..(j + 1) * h].copy_from_slice(&line[h..]);
        }
    }
}

/// Mutable references to elements `i < j` of a deque given as two slices.
fn pair_mut<'s, T>(a: &'s mut [T], b: &'s mut [T], i: usize, j: usize) -> (&'s mut T, &'s mut T) {
    let la = a.len();
    if j < la {
        let (x, y) = a.split_at_mut(j);
        (&mut x[i], &mut y[0])
    } else if i >= la {
        let (x, y) = b.split_at_mut(j - la);
        (&mut x[i - la], &mut y[0])
    } else {
        (&mut a[i], &mut b[j - la])
    }
}
