//! Product codes: encoding and the iterative decoders.
//!
//! Arrays are `n x n`, row-major. The information block occupies rows and
//! columns `0..k`. A decoder iteration is a row phase followed by a column
//! phase; internally both phases work on the rows of an array, and arrays are
//! transposed between phases.

use crate::bch::{BchCode, DecodeStatus, TernaryWord};
use crate::channel::LlrGrid;
use crate::decoder::{
    check_lut, is_miscorrection, transpose, two_branch_update, Branch, DecodeSchedule,
    DecoderKind, DecoderStats, LineScratch, Reliability,
};
use crate::error::{Error, Result};
use crate::lut::CombiningLut;
use crate::soft::{hard_map, PackedMessage};

/// Product code with identical row and column component codes.
#[derive(Clone, Debug)]
pub struct ProductCode {
    code: BchCode,
}

/// A code array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcBlock {
    n: usize,
    bits: Vec<u8>,
}

impl PcBlock {
    pub fn from_bits(n: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                actual: bits.len(),
            });
        }
        Ok(Self { n, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.bits[r * self.n + c]
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.bits[r * self.n..(r + 1) * self.n]
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        (0..self.n).map(|r| self.get(r, c)).collect()
    }

    /// Whether every row and column is a codeword of `code`.
    pub fn is_valid(&self, code: &BchCode) -> bool {
        let zero = |w: &[u8]| {
            code.syndromes(w).iter().all(|&s| s == 0)
                && (!code.is_extended() || w.iter().fold(0, |a, &b| a ^ b) == 0)
        };
        (0..self.n).all(|i| zero(self.row(i)) && zero(&self.column(i)))
    }
}

impl ProductCode {
    pub fn new(code: BchCode) -> Self {
        Self { code }
    }

    pub fn component(&self) -> &BchCode {
        &self.code
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn k(&self) -> usize {
        self.code.k()
    }

    /// `k^2 / n^2`.
    pub fn rate(&self) -> f64 {
        crate::codes::pc_rate(&self.code)
    }

    /// Number of information bits per block.
    pub fn info_len(&self) -> usize {
        self.k() * self.k()
    }

    /// Encodes a `k x k` row-major information block: rows first, then every
    /// column.
    pub fn encode(&self, info: &[u8]) -> Result<PcBlock> {
        let (n, k) = (self.n(), self.k());
        if info.len() != k * k {
            return Err(Error::LengthMismatch {
                expected: k * k,
                actual: info.len(),
            });
        }
        let mut bits = vec![0u8; n * n];
        for r in 0..k {
            self.code
                .encode_into(&info[r * k..(r + 1) * k], &mut bits[r * n..(r + 1) * n]);
        }
        let mut col_in = vec![0u8; k];
        let mut col_out = vec![0u8; n];
        for c in 0..n {
            for r in 0..k {
                col_in[r] = bits[r * n + c];
            }
            self.code.encode_into(&col_in, &mut col_out);
            for r in k..n {
                bits[r * n + c] = col_out[r];
            }
        }
        Ok(PcBlock { n, bits })
    }

    /// The `k x k` information part of an array of decisions.
    pub fn info_bits(&self, bits: &[u8]) -> Vec<u8> {
        let (n, k) = (self.n(), self.k());
        (0..k).flat_map(|r| bits[r * n..r * n + k].iter().copied()).collect()
    }
}

/// Which lines a message grid holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Rows,
    Columns,
}

/// Ternary outcomes of one phase: line `i` is the outcome of row `i` (or
/// column `i`). Values are stored line by line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageGrid {
    n: usize,
    orientation: Orientation,
    values: Vec<i8>,
    status: Vec<DecodeStatus>,
}

impl MessageGrid {
    /// All-failure grid: reconstructs to the channel LLRs.
    pub fn failures(n: usize, orientation: Orientation) -> Self {
        Self {
            n,
            orientation,
            values: vec![0; n * n],
            status: vec![DecodeStatus::Failure; n],
        }
    }

    pub fn from_words(words: &[TernaryWord], orientation: Orientation) -> Result<Self> {
        let n = words.len();
        let mut values = Vec::with_capacity(n * n);
        let mut status = Vec::with_capacity(n);
        for w in words {
            if w.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: w.len(),
                });
            }
            values.extend_from_slice(w.values());
            status.push(w.status());
        }
        Ok(Self {
            n,
            orientation,
            values,
            status,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn line(&self, i: usize) -> &[i8] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn status(&self, i: usize) -> DecodeStatus {
        self.status[i]
    }

    pub fn word(&self, i: usize) -> TernaryWord {
        match self.status[i] {
            DecodeStatus::Failure => TernaryWord::failure(self.n),
            DecodeStatus::Decoded => {
                let bits: Vec<u8> = self.line(i).iter().map(|&v| (v < 0) as u8).collect();
                TernaryWord::decoded(&bits)
            }
        }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Value at array position `(r, c)` regardless of orientation.
    pub fn at(&self, r: usize, c: usize) -> i8 {
        match self.orientation {
            Orientation::Rows => self.values[r * self.n + c],
            Orientation::Columns => self.values[c * self.n + r],
        }
    }

    pub fn pack(&self) -> Vec<PackedMessage> {
        (0..self.n).map(|i| PackedMessage::pack(&self.word(i))).collect()
    }

    pub fn unpack(messages: &[PackedMessage], orientation: Orientation) -> Result<Self> {
        let words = messages
            .iter()
            .map(PackedMessage::unpack)
            .collect::<Result<Vec<_>>>()?;
        Self::from_words(&words, orientation)
    }

    /// Values aligned with the lines of the other orientation.
    fn transposed_values(&self) -> Vec<i8> {
        let mut t = vec![0i8; self.n * self.n];
        transpose(&self.values, self.n, &mut t);
        t
    }
}

/// Output of a product-code decoder.
#[derive(Clone, Debug)]
pub struct PcOutput {
    /// Final `n x n` hard decisions, row-major.
    pub decisions: Vec<u8>,
    pub stats: DecoderStats,
    /// Bit errors of the hard decisions after every phase; empty without a
    /// reference.
    pub trajectory: Vec<u64>,
    /// Bits handed from one table-driven phase to the next: `n` per line for
    /// hard decisions, the wire length for packed ternary messages, and two
    /// bits per symbol for unpacked ternary messages.
    pub soft_message_bits: u64,
}

/// Product-code decoder configuration.
#[derive(Clone, Debug)]
pub struct PcDecoder<'a> {
    code: &'a BchCode,
    kind: DecoderKind,
    schedule: DecodeSchedule,
    lut: Option<&'a CombiningLut>,
    packed_messages: bool,
}

struct Lines<'a> {
    n: usize,
    llr: [&'a [f64]; 2],
    reference: Option<[&'a [u8]; 2]>,
}

impl<'a> PcDecoder<'a> {
    pub fn new(
        code: &'a BchCode,
        kind: DecoderKind,
        schedule: DecodeSchedule,
        lut: Option<&'a CombiningLut>,
    ) -> Result<Self> {
        check_lut(kind, lut, &schedule)?;
        Ok(Self {
            code,
            kind,
            schedule,
            lut,
            packed_messages: false,
        })
    }

    /// Routes BEE messages through their `n + 1` bit wire format.
    pub fn with_packed_messages(mut self, on: bool) -> Self {
        self.packed_messages = on;
        self
    }

    pub fn kind(&self) -> DecoderKind {
        self.kind
    }

    /// Decodes one array. `reference` (the transmitted array) enables the
    /// miscorrection counts and the trajectory, and is required by the
    /// genie-aided decoder.
    pub fn decode(&self, llr: &LlrGrid, reference: Option<&[u8]>) -> Result<PcOutput> {
        let n = self.code.n();
        if llr.rows() != n || llr.cols() != n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                actual: llr.rows() * llr.cols(),
            });
        }
        if let Some(r) = reference {
            if r.len() != n * n {
                return Err(Error::LengthMismatch {
                    expected: n * n,
                    actual: r.len(),
                });
            }
        }
        if self.kind == DecoderKind::IdealIbdd && reference.is_none() {
            return Err(Error::InvalidParameters(
                "ideal iBDD needs the transmitted array".into(),
            ));
        }

        let mut llr_t = vec![0.0; n * n];
        transpose(llr.data(), n, &mut llr_t);
        let ref_t = reference.map(|r| {
            let mut t = vec![0u8; n * n];
            transpose(r, n, &mut t);
            t
        });
        let lines = Lines {
            n,
            llr: [llr.data(), &llr_t],
            reference: reference.map(|r| [r, ref_t.as_deref().unwrap()]),
        };

        let mut out = PcOutput {
            decisions: Vec::new(),
            stats: DecoderStats::default(),
            trajectory: Vec::new(),
            soft_message_bits: 0,
        };
        // psi holds the current decisions in the orientation of the phase
        // about to run; phases alternate 0 (rows) and 1 (columns)
        let mut psi: Vec<u8> = llr.data().iter().map(|&l| hard_map(l)).collect();
        let (plain, soft) = match self.kind {
            DecoderKind::Ibdd | DecoderKind::IdealIbdd => (self.schedule.total(), 0),
            _ => (self.schedule.appended_iterations, self.schedule.soft_iterations),
        };
        let genie = self.kind == DecoderKind::IdealIbdd;

        match self.kind {
            DecoderKind::IbddSr | DecoderKind::IbddCr => {
                for it in 0..soft {
                    for phase in 0..2 {
                        let w = self.lut.unwrap().phase_weight(it, phase)?;
                        cr_phase(self.code, &mut psi, &lines, phase, w, &mut out);
                        out.soft_message_bits += (n * n) as u64;
                        flip_orientation(&mut psi, n);
                    }
                }
            }
            DecoderKind::Bee => {
                psi = self.bee_soft(&lines, soft, &mut out)?;
            }
            _ => {}
        }
        for _ in 0..plain {
            for phase in 0..2 {
                ibdd_phase(self.code, &mut psi, &lines, phase, genie, &mut out);
                flip_orientation(&mut psi, n);
            }
        }
        out.decisions = psi;
        Ok(out)
    }

    /// Soft iterations of BEE-PC. Returns row-oriented decisions.
    fn bee_soft(&self, lines: &Lines<'_>, soft: usize, out: &mut PcOutput) -> Result<Vec<u8>> {
        let n = lines.n;
        let lut = self.lut.unwrap();
        let mut prev = MessageGrid::failures(n, Orientation::Columns);
        let mut w_prev = 0.0;
        let mut psi = vec![0u8; n * n];
        for it in 0..soft {
            for phase in 0..2 {
                let w = lut.phase_weight(it, phase)?;
                let last = it + 1 == soft && phase == 1;
                let aligned = prev.transposed_values();
                let (grid, decisions) = bee_phase(
                    self.code,
                    &aligned,
                    lines,
                    phase,
                    w_prev,
                    w,
                    self.schedule.erasure_branch,
                    out,
                );
                prev = if self.packed_messages {
                    let wire = grid.pack();
                    out.soft_message_bits += wire.iter().map(|m| m.len() as u64).sum::<u64>();
                    MessageGrid::unpack(&wire, grid.orientation())?
                } else {
                    out.soft_message_bits += 2 * (n * n) as u64;
                    grid
                };
                w_prev = w;
                if last {
                    psi = decisions;
                }
            }
        }
        if soft == 0 {
            psi = lines.llr[0].iter().map(|&l| hard_map(l)).collect();
        } else {
            // the last phase ran on columns; back to rows
            flip_orientation(&mut psi, n);
        }
        Ok(psi)
    }
}

fn flip_orientation(psi: &mut Vec<u8>, n: usize) {
    let mut t = vec![0u8; n * n];
    transpose(psi, n, &mut t);
    *psi = t;
}

fn record(out: &mut PcOutput, psi: &[u8], lines: &Lines<'_>, phase: usize) {
    if let Some(r) = lines.reference {
        let errs = psi.iter().zip(r[phase]).filter(|(a, b)| a != b).count();
        out.trajectory.push(errs as u64);
    }
}

/// Plain BDD on every line; failures and (with the genie) miscorrections
/// leave the line unchanged.
fn ibdd_phase(
    code: &BchCode,
    psi: &mut [u8],
    lines: &Lines<'_>,
    phase: usize,
    genie: bool,
    out: &mut PcOutput,
) {
    let n = lines.n;
    let mut decoded = vec![0u8; n];
    for i in 0..n {
        let line = &mut psi[i * n..(i + 1) * n];
        out.stats.decodes += 1;
        let Some(flips) = code.bdd_flips(line) else {
            out.stats.failures += 1;
            continue;
        };
        decoded.copy_from_slice(line);
        for &f in &flips {
            decoded[f] ^= 1;
        }
        let wrong = lines
            .reference
            .is_some_and(|r| decoded[..] != r[phase][i * n..(i + 1) * n]);
        if wrong {
            out.stats.miscorrections += 1;
            if genie {
                continue;
            }
        }
        line.copy_from_slice(&decoded);
    }
    record(out, psi, lines, phase);
}

/// Hard-message iBDD-CR (and iBDD-SR) phase: BDD, then
/// `psi = B(w mu + l)` with `mu` the ternary outcome.
fn cr_phase(
    code: &BchCode,
    psi: &mut [u8],
    lines: &Lines<'_>,
    phase: usize,
    w: f64,
    out: &mut PcOutput,
) {
    let n = lines.n;
    for i in 0..n {
        let line = &mut psi[i * n..(i + 1) * n];
        let llr = &lines.llr[phase][i * n..(i + 1) * n];
        out.stats.decodes += 1;
        match code.bdd_flips(line) {
            Some(flips) => {
                for &f in &flips {
                    line[f] ^= 1;
                }
                if let Some(r) = lines.reference {
                    if *line != r[phase][i * n..(i + 1) * n] {
                        out.stats.miscorrections += 1;
                    }
                }
                for (b, &l) in line.iter_mut().zip(llr) {
                    let mu = 1.0 - 2.0 * *b as f64;
                    *b = hard_map(mu * w + l);
                }
            }
            None => {
                out.stats.failures += 1;
                for (b, &l) in line.iter_mut().zip(llr) {
                    *b = hard_map(l);
                }
            }
        }
    }
    record(out, psi, lines, phase);
}

/// One BEE-PC phase. `prev` holds the previous phase's ternary outcomes
/// aligned with this phase's lines; `w_prev` is the weight that phase used.
#[allow(clippy::too_many_arguments)]
fn bee_phase(
    code: &BchCode,
    prev: &[i8],
    lines: &Lines<'_>,
    phase: usize,
    w_prev: f64,
    w: f64,
    erasure_branch: bool,
    out: &mut PcOutput,
) -> (MessageGrid, Vec<u8>) {
    let n = lines.n;
    let mut values = vec![0i8; n * n];
    let mut status = vec![DecodeStatus::Failure; n];
    let mut psi = vec![0u8; n * n];
    let mut lc = vec![0.0; n];
    let mut rel = vec![0.0; n];
    let mut psi_c = vec![0u8; n];
    let mut scratch = LineScratch::new(n);
    for i in 0..n {
        let span = i * n..(i + 1) * n;
        let llr = &lines.llr[phase][span.clone()];
        for j in 0..n {
            lc[j] = prev[i * n + j] as f64 * w_prev + llr[j];
            psi_c[j] = hard_map(lc[j]);
            rel[j] = lc[j].abs();
        }
        let up = two_branch_update(
            code,
            &psi_c,
            llr,
            w,
            Reliability::Input(&rel),
            erasure_branch,
            &mut values[span.clone()],
            &mut psi[span.clone()],
            &mut scratch,
        );
        out.stats.decodes += 1;
        status[i] = up.status;
        match up.status {
            DecodeStatus::Failure => out.stats.failures += 1,
            DecodeStatus::Decoded => {
                if let Some(r) = lines.reference {
                    if is_miscorrection(&values[span.clone()], &r[phase][span]) {
                        out.stats.miscorrections += 1;
                    }
                }
            }
        }
        if up.branch == Branch::Erasure {
            out.stats.erasure_selected += 1;
        }
    }
    record(out, &psi, lines, phase);
    let orientation = if phase == 0 {
        Orientation::Rows
    } else {
        Orientation::Columns
    };
    (
        MessageGrid {
            n,
            orientation,
            values,
            status,
        },
        psi,
    )
}

fn phase_lines<'a>(llr: &'a LlrGrid, code: &BchCode) -> Result<Lines<'a>> {
    let n = code.n();
    if llr.rows() != n || llr.cols() != n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            actual: llr.rows() * llr.cols(),
        });
    }
    Ok(Lines {
        n,
        llr: [llr.data(), llr.data()],
        reference: None,
    })
}

fn aligned_to_rows(m_col: &MessageGrid, n: usize) -> Result<Vec<i8>> {
    if m_col.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: m_col.n(),
        });
    }
    Ok((0..n * n).map(|p| m_col.at(p / n, p % n)).collect())
}

/// One iBDD-CR row phase from the previous column outcomes: rebuild
/// `Psi^c = B(w_prev M^c + L)`, decode every row, and return
/// `Psi^r = B(w M^r + L)` with the row outcomes `M^r`.
pub fn ibdd_cr_row_phase(
    code: &BchCode,
    m_col: &MessageGrid,
    llr: &LlrGrid,
    w_prev: f64,
    w: f64,
) -> Result<(Vec<u8>, MessageGrid)> {
    let (psi, grid, _) = bee_pc_row_phase(code, m_col, llr, w_prev, w, false)?;
    Ok((psi, grid))
}

/// One BEE-PC row phase. Returns the row decisions, the selected row
/// outcomes, and which branch each row selected.
pub fn bee_pc_row_phase(
    code: &BchCode,
    m_col: &MessageGrid,
    llr: &LlrGrid,
    w_prev: f64,
    w: f64,
    erasure_branch: bool,
) -> Result<(Vec<u8>, MessageGrid, Vec<Branch>)> {
    let lines = phase_lines(llr, code)?;
    let n = lines.n;
    let prev = aligned_to_rows(m_col, n)?;
    let mut psi = vec![0u8; n * n];
    let mut values = vec![0i8; n * n];
    let mut status = Vec::with_capacity(n);
    let mut branches = Vec::with_capacity(n);
    let mut lc = vec![0.0; n];
    let mut rel = vec![0.0; n];
    let mut psi_c = vec![0u8; n];
    let mut scratch = LineScratch::new(n);
    for i in 0..n {
        let span = i * n..(i + 1) * n;
        let l = llr.row(i);
        for j in 0..n {
            lc[j] = prev[i * n + j] as f64 * w_prev + l[j];
            psi_c[j] = hard_map(lc[j]);
            rel[j] = lc[j].abs();
        }
        let up = two_branch_update(
            code,
            &psi_c,
            l,
            w,
            Reliability::Input(&rel),
            erasure_branch,
            &mut values[span.clone()],
            &mut psi[span],
            &mut scratch,
        );
        status.push(up.status);
        branches.push(up.branch);
    }
    let grid = MessageGrid {
        n,
        orientation: Orientation::Rows,
        values,
        status,
    };
    Ok((psi, grid, branches))
}
