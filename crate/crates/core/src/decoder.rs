//! Decoder selection, iteration schedules, statistics, and the per-line
//! update shared by the product and staircase decoders.

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bch::{BchCode, DecodeStatus};
use crate::error::{Error, Result};
use crate::lut::CombiningLut;
use crate::soft::{failure_score, gd_unchecked, hard_map, two_least_reliable_by};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    /// Iterative bounded-distance decoding on hard decisions.
    Ibdd,
    /// iBDD with a genie that rejects every miscorrection.
    IdealIbdd,
    /// Decoded bits scaled by a constant factor and added to the channel LLR.
    IbddSr,
    /// Decoded bits combined with the channel LLR through a table.
    IbddCr,
    /// iBDD-CR plus a second errors-and-erasures attempt, chosen by
    /// generalised distance.
    Bee,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 5] = [
        Self::Ibdd,
        Self::IdealIbdd,
        Self::IbddSr,
        Self::IbddCr,
        Self::Bee,
    ];

    /// Whether the decoder reads a combining table.
    pub fn needs_lut(self) -> bool {
        matches!(self, Self::IbddSr | Self::IbddCr | Self::Bee)
    }
}

impl FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ibdd" => Ok(Self::Ibdd),
            "ideal-ibdd" | "ideal" => Ok(Self::IdealIbdd),
            "ibdd-sr" | "sr" => Ok(Self::IbddSr),
            "ibdd-cr" | "cr" => Ok(Self::IbddCr),
            "bee" | "bee-pc" | "bee-scc" => Ok(Self::Bee),
            other => Err(Error::Config(format!("unknown decoder `{other}`"))),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ibdd => "ibdd",
            Self::IdealIbdd => "ideal-ibdd",
            Self::IbddSr => "ibdd-sr",
            Self::IbddCr => "ibdd-cr",
            Self::Bee => "bee",
        })
    }
}

/// Iteration budget. Table-driven iterations come first, then plain iBDD
/// iterations on the hard decisions. Decoders without a table run all
/// `soft_iterations + appended_iterations` as plain iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeSchedule {
    pub soft_iterations: usize,
    pub appended_iterations: usize,
    /// Enables the errors-and-erasures branch of the BEE decoders.
    pub erasure_branch: bool,
}

impl Default for DecodeSchedule {
    fn default() -> Self {
        Self {
            soft_iterations: 10,
            appended_iterations: 2,
            erasure_branch: true,
        }
    }
}

impl DecodeSchedule {
    pub fn total(&self) -> usize {
        self.soft_iterations + self.appended_iterations
    }

    pub fn validate(&self) -> Result<()> {
        if self.total() == 0 {
            return Err(Error::InvalidParameters("schedule has no iterations".into()));
        }
        Ok(())
    }
}

/// Component-decoder event counts. Miscorrections are only counted when the
/// transmitted word is known.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderStats {
    pub decodes: u64,
    pub failures: u64,
    pub miscorrections: u64,
    /// Lines where the erasure branch won the selection.
    pub erasure_selected: u64,
}

impl AddAssign for DecoderStats {
    fn add_assign(&mut self, o: Self) {
        self.decodes += o.decodes;
        self.failures += o.failures;
        self.miscorrections += o.miscorrections;
        self.erasure_selected += o.erasure_selected;
    }
}

/// Checks that a table covers the soft iterations a decoder will run.
pub(crate) fn check_lut(
    kind: DecoderKind,
    lut: Option<&CombiningLut>,
    schedule: &DecodeSchedule,
) -> Result<()> {
    schedule.validate()?;
    if !kind.needs_lut() {
        return Ok(());
    }
    let lut = lut.ok_or_else(|| Error::MissingLut(kind.to_string()))?;
    let covered = lut.iterations();
    if covered < schedule.soft_iterations {
        return Err(Error::IterationOutOfRange {
            iteration: schedule.soft_iterations - 1,
            len: covered,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Bdd,
    Erasure,
}

/// Result of a two-branch line update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineUpdate {
    pub status: DecodeStatus,
    pub branch: Branch,
}

/// Where the reliabilities for the distance score and erasure selection
/// come from.
#[derive(Clone, Copy, Debug)]
pub enum Reliability<'a> {
    /// Given per bit (the reconstructed input LLRs of BEE-PC).
    Input(&'a [f64]),
    /// `|L̄|`, the combined LLRs of the BDD branch (BEE-SCC). The first
    /// `pinned` positions hold known bits: they are never erased and do not
    /// enter the distance score.
    BddBranch { pinned: usize },
}

/// Scratch buffers for [`two_branch_update`].
#[derive(Clone, Debug, Default)]
pub struct LineScratch {
    m1: Vec<i8>,
    l1: Vec<f64>,
    p1: Vec<u8>,
    m2: Vec<i8>,
    p2: Vec<u8>,
}

impl LineScratch {
    pub fn new(n: usize) -> Self {
        Self {
            m1: vec![0; n],
            l1: vec![0.0; n],
            p1: vec![0; n],
            m2: vec![0; n],
            p2: vec![0; n],
        }
    }
}

/// Ternary values of a decoded word: the input with `flips` toggled, mapped
/// 0 -> +1 and 1 -> -1. `erased` positions are taken as 0 before flipping.
fn decoded_values(input: &[u8], erased: &[usize], flips: &[usize], out: &mut [i8]) {
    for (o, &b) in out.iter_mut().zip(input) {
        *o = 1 - 2 * b as i8;
    }
    for &e in erased {
        out[e] = 1;
    }
    for &f in flips {
        out[f] = -out[f];
    }
}

/// Combines ternary values with channel LLRs and slices:
/// `psi = B(w m + l)`, optionally keeping the combined LLRs.
#[inline]
fn combine_slice(m: &[i8], llr: &[f64], w: f64, psi: &mut [u8], keep: Option<&mut [f64]>) {
    match keep {
        Some(out) => {
            for (((p, o), &v), &l) in psi.iter_mut().zip(out.iter_mut()).zip(m).zip(llr) {
                let x = v as f64 * w + l;
                *o = x;
                *p = hard_map(x);
            }
        }
        None => {
            for ((p, &v), &l) in psi.iter_mut().zip(m).zip(llr) {
                *p = hard_map(v as f64 * w + l);
            }
        }
    }
}

/// One line of a BEE decoder.
///
/// Branch 1 runs BDD on `psi_in`, combines the outcome with `llr` using
/// weight `w` and scores the sliced candidate against `psi_in`. Branch 2
/// erases the two least reliable positions, runs errors-and-erasures
/// decoding and is scored the same way. A failed branch scores `2n`; ties go
/// to branch 1. The winning ternary outcome is written to `msg_out` and its
/// sliced decision to `psi_out`.
#[allow(clippy::too_many_arguments)]
pub fn two_branch_update(
    code: &BchCode,
    psi_in: &[u8],
    llr: &[f64],
    w: f64,
    reliability: Reliability<'_>,
    erasure_branch: bool,
    msg_out: &mut [i8],
    psi_out: &mut [u8],
    scratch: &mut LineScratch,
) -> LineUpdate {
    let n = psi_in.len();
    let LineScratch { m1, l1, p1, m2, p2 } = scratch;

    let flips1 = code.bdd_flips(psi_in);
    match &flips1 {
        Some(f) => decoded_values(psi_in, &[], f, m1),
        None => m1.fill(0),
    }
    combine_slice(m1, llr, w, p1, Some(l1));
    let (rel, skip): (&[f64], usize) = match reliability {
        Reliability::Input(r) => (r, 0),
        Reliability::BddBranch { pinned } => (l1, pinned),
    };
    let d1 = match flips1 {
        Some(_) => gd_unchecked(&p1[skip..], &psi_in[skip..], &rel[skip..]),
        None => failure_score(n),
    };
    let status1 = if flips1.is_some() {
        DecodeStatus::Decoded
    } else {
        DecodeStatus::Failure
    };

    if erasure_branch {
        let (a, b) = two_least_reliable_by(n - skip, |i| rel[skip + i]);
        let erased = [skip + a, skip + b];
        if let Some(f) = code.eed_flips(psi_in, &erased) {
            decoded_values(psi_in, &erased, &f, m2);
            combine_slice(m2, llr, w, p2, None);
            let d2 = gd_unchecked(&p2[skip..], &psi_in[skip..], &rel[skip..]);
            if d1 > d2 {
                msg_out.copy_from_slice(m2);
                psi_out.copy_from_slice(p2);
                return LineUpdate {
                    status: DecodeStatus::Decoded,
                    branch: Branch::Erasure,
                };
            }
        }
    }
    msg_out.copy_from_slice(m1);
    psi_out.copy_from_slice(p1);
    LineUpdate {
        status: status1,
        branch: Branch::Bdd,
    }
}

/// Whether a decoded ternary line disagrees with the transmitted bits.
#[inline]
pub(crate) fn is_miscorrection(values: &[i8], reference: &[u8]) -> bool {
    values.iter().zip(reference).any(|(&v, &r)| (v < 0) as u8 != r)
}

/// Transposes an `n x n` row-major array.
pub(crate) fn transpose<T: Copy>(src: &[T], n: usize, dst: &mut [T]) {
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}
