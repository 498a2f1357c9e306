//! C ABI for the component codes, the message wire format and the
//! product-code decoders.
//!
//! Every fallible function returns a [`ProdecStatus`]; on failure the
//! message is kept per thread and can be read with
//! [`prodec_last_error_message`]. Handles are opaque and must be released
//! with their `_free` function. Bits are passed as one `uint8_t` (0 or 1)
//! per bit.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use prodec::channel::{Constellation, LlrGrid};
use prodec::decoder::{DecodeSchedule, DecoderKind};
use prodec::lut::{CombiningLut, LutSet};
use prodec::pc::PcDecoder;
use prodec::soft::PackedMessage;
use prodec::{BchCode, Error, TernaryWord};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProdecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    MissingLut = 4,
    MalformedMessage = 5,
    Io = 6,
    LutFormat = 7,
    Panic = 8,
}

/// Decoder selection.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProdecDecoderKind {
    Ibdd = 0,
    IdealIbdd = 1,
    IbddSr = 2,
    IbddCr = 3,
    Bee = 4,
}

impl From<ProdecDecoderKind> for DecoderKind {
    fn from(k: ProdecDecoderKind) -> Self {
        match k {
            ProdecDecoderKind::Ibdd => DecoderKind::Ibdd,
            ProdecDecoderKind::IdealIbdd => DecoderKind::IdealIbdd,
            ProdecDecoderKind::IbddSr => DecoderKind::IbddSr,
            ProdecDecoderKind::IbddCr => DecoderKind::IbddCr,
            ProdecDecoderKind::Bee => DecoderKind::Bee,
        }
    }
}

/// A BCH/eBCH component code.
pub struct ProdecCode {
    code: BchCode,
}

/// A combining table.
pub struct ProdecLut {
    lut: CombiningLut,
}

/// A product-code decoder over an owned component code and table.
pub struct ProdecPcDecoder {
    code: BchCode,
    lut: Option<CombiningLut>,
    kind: DecoderKind,
    schedule: DecodeSchedule,
    packed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ProdecStatus {
    match e {
        Error::LengthMismatch { .. } => ProdecStatus::LengthMismatch,
        Error::MissingLut(_) => ProdecStatus::MissingLut,
        Error::MalformedMessage(_) => ProdecStatus::MalformedMessage,
        Error::Io(_) => ProdecStatus::Io,
        Error::LutFormat(_) => ProdecStatus::LutFormat,
        _ => ProdecStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (ProdecStatus, String)>) -> ProdecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ProdecStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ProdecStatus::Panic
        }
    }
}

fn lib(e: Error) -> (ProdecStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ProdecStatus, String) {
    (ProdecStatus::NullPointer, format!("{what} is null"))
}

fn check_len(expected: usize, actual: usize) -> Result<(), (ProdecStatus, String)> {
    if expected != actual {
        return Err(lib(Error::LengthMismatch { expected, actual }));
    }
    Ok(())
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (ProdecStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or valid for `len` writes.
unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], (ProdecStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len - 1` bytes). Returns the full message
/// length, so a call with `len = 0` sizes the buffer.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn prodec_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a code of length `2^v - 1 - s` (+1 when `extended`).
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn prodec_code_new(
    v: u32,
    t: usize,
    s: usize,
    extended: bool,
    out: *mut *mut ProdecCode,
) -> ProdecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let code = BchCode::new(v, t, s, extended).map_err(lib)?;
        *out = Box::into_raw(Box::new(ProdecCode { code }));
        Ok(())
    })
}

/// # Safety
/// `code` must be null or a handle from [`prodec_code_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prodec_code_free(code: *mut ProdecCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Code length, or 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn prodec_code_n(code: *const ProdecCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.n())
}

/// Information length, or 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn prodec_code_k(code: *const ProdecCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.k())
}

/// Designed minimum distance, or 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn prodec_code_dmin(code: *const ProdecCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.dmin())
}

/// Systematic encoding: `info[0..k]` to `codeword[0..n]`.
///
/// # Safety
/// `info` must hold `k` bytes and `codeword` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn prodec_code_encode(
    code: *const ProdecCode,
    info: *const u8,
    k: usize,
    codeword: *mut u8,
    n: usize,
) -> ProdecStatus {
    guard(|| {
        let c = &code.as_ref().ok_or_else(|| null("code"))?.code;
        check_len(c.k(), k)?;
        check_len(c.n(), n)?;
        let info = input(info, k, "info")?;
        let out = output(codeword, n, "codeword")?;
        out.copy_from_slice(&c.encode(info).map_err(lib)?);
        Ok(())
    })
}

fn apply(word: &mut [u8], flips: Option<Vec<usize>>, decoded: &mut bool) {
    *decoded = flips.is_some();
    for f in flips.into_iter().flatten() {
        word[f] ^= 1;
    }
}

/// Bounded-distance decoding in place. On failure `word` is left unchanged
/// and `*decoded` is false; the status is still `Ok`.
///
/// # Safety
/// `word` must hold `n` bytes; `decoded` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn prodec_code_bdd(
    code: *const ProdecCode,
    word: *mut u8,
    n: usize,
    decoded: *mut bool,
) -> ProdecStatus {
    guard(|| {
        let c = &code.as_ref().ok_or_else(|| null("code"))?.code;
        check_len(c.n(), n)?;
        let w = output(word, n, "word")?;
        let d = decoded.as_mut().ok_or_else(|| null("decoded"))?;
        if w.iter().any(|&b| b > 1) {
            return Err((ProdecStatus::InvalidArgument, "word holds non-binary values".into()));
        }
        apply(w, c.bdd_flips(w), d);
        Ok(())
    })
}

/// Errors-and-erasures decoding in place, with erased positions
/// `erasures[0..count]`. On failure `word` is left unchanged.
///
/// # Safety
/// `word` must hold `n` bytes, `erasures` `count` entries (may be null when
/// `count` is 0), and `decoded` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn prodec_code_eed(
    code: *const ProdecCode,
    word: *mut u8,
    n: usize,
    erasures: *const usize,
    count: usize,
    decoded: *mut bool,
) -> ProdecStatus {
    guard(|| {
        let c = &code.as_ref().ok_or_else(|| null("code"))?.code;
        check_len(c.n(), n)?;
        let w = output(word, n, "word")?;
        let d = decoded.as_mut().ok_or_else(|| null("decoded"))?;
        let er: &[usize] = if count == 0 { &[] } else { input(erasures, count, "erasures")? };
        if w.iter().any(|&b| b > 1) {
            return Err((ProdecStatus::InvalidArgument, "word holds non-binary values".into()));
        }
        let res = c.eed_decode(w, er).map_err(lib)?;
        *d = res.is_decoded();
        if let Some(bits) = res.bits() {
            w.copy_from_slice(&bits);
        }
        Ok(())
    })
}

/// Packs a ternary message (`values[0..n]` in {-1, 0, +1}, all zero for a
/// failure) into `n + 1` wire bits.
///
/// # Safety
/// `values` must hold `n` entries and `bits` room for `n + 1`.
#[no_mangle]
pub unsafe extern "C" fn prodec_pack(values: *const i8, n: usize, bits: *mut u8, bits_len: usize) -> ProdecStatus {
    guard(|| {
        check_len(n + 1, bits_len)?;
        let v = input(values, n, "values")?;
        let out = output(bits, bits_len, "bits")?;
        let word = TernaryWord::from_values(v.to_vec()).map_err(lib)?;
        out.copy_from_slice(PackedMessage::pack(&word).bits());
        Ok(())
    })
}

/// Inverse of [`prodec_pack`]: `bits[0..n+1]` to `values[0..n]`.
///
/// # Safety
/// `bits` must hold `bits_len` bytes and `values` room for `bits_len - 1`.
#[no_mangle]
pub unsafe extern "C" fn prodec_unpack(bits: *const u8, bits_len: usize, values: *mut i8, n: usize) -> ProdecStatus {
    guard(|| {
        check_len(n + 1, bits_len)?;
        let b = input(bits, bits_len, "bits")?;
        let out = output(values, n, "values")?;
        let msg = PackedMessage::from_bits(b.to_vec()).map_err(lib)?;
        out.copy_from_slice(msg.unpack().map_err(lib)?.values());
        Ok(())
    })
}

/// Noise standard deviation per real dimension for Eb/N0 `ebn0_db`, code
/// rate `rate` and `m` bits per real dimension.
///
/// # Safety
/// `sigma` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn prodec_sigma_for_ebn0(m: u32, ebn0_db: f64, rate: f64, sigma: *mut f64) -> ProdecStatus {
    guard(|| {
        let s = sigma.as_mut().ok_or_else(|| null("sigma"))?;
        *s = Constellation::new(m)
            .and_then(|c| c.sigma_for_ebn0(ebn0_db, rate))
            .map_err(lib)?;
        Ok(())
    })
}

/// A table with weight `w` at every one of `iterations` iterations.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn prodec_lut_constant(w: f64, iterations: usize, out: *mut *mut ProdecLut) -> ProdecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let lut = CombiningLut::constant(w, iterations);
        lut.validate().map_err(lib)?;
        *out = Box::into_raw(Box::new(ProdecLut { lut }));
        Ok(())
    })
}

/// Loads the table closest to `sigma` from a table file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn prodec_lut_load(path: *const c_char, sigma: f64, out: *mut *mut ProdecLut) -> ProdecStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (ProdecStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let set = LutSet::load(Path::new(p)).map_err(lib)?;
        let lut = set.nearest(sigma).cloned().ok_or_else(|| lib(Error::LutFormat("empty".into())))?;
        *out = Box::into_raw(Box::new(ProdecLut { lut }));
        Ok(())
    })
}

/// # Safety
/// `lut` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn prodec_lut_free(lut: *mut ProdecLut) {
    if !lut.is_null() {
        drop(Box::from_raw(lut));
    }
}

/// Creates a product-code decoder. The code and table are copied, so both
/// handles may be freed afterwards. `lut` may be null for decoders without
/// a table.
///
/// # Safety
/// `code` must be live, `lut` null or live, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn prodec_pc_decoder_new(
    code: *const ProdecCode,
    kind: ProdecDecoderKind,
    soft_iterations: usize,
    appended_iterations: usize,
    erasure_branch: bool,
    lut: *const ProdecLut,
    out: *mut *mut ProdecPcDecoder,
) -> ProdecStatus {
    guard(|| {
        let c = &code.as_ref().ok_or_else(|| null("code"))?.code;
        if out.is_null() {
            return Err(null("out"));
        }
        let schedule = DecodeSchedule {
            soft_iterations,
            appended_iterations,
            erasure_branch,
        };
        schedule.validate().map_err(lib)?;
        let lut = lut.as_ref().map(|l| l.lut.clone());
        let kind = DecoderKind::from(kind);
        PcDecoder::new(c, kind, schedule, lut.as_ref()).map_err(lib)?;
        *out = Box::into_raw(Box::new(ProdecPcDecoder {
            code: c.clone(),
            lut,
            kind,
            schedule,
            packed: false,
        }));
        Ok(())
    })
}

/// Routes BEE messages through the packed wire format.
///
/// # Safety
/// `dec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn prodec_pc_decoder_set_packed(dec: *mut ProdecPcDecoder, packed: bool) -> ProdecStatus {
    guard(|| {
        dec.as_mut().ok_or_else(|| null("decoder"))?.packed = packed;
        Ok(())
    })
}

/// # Safety
/// `dec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn prodec_pc_decoder_free(dec: *mut ProdecPcDecoder) {
    if !dec.is_null() {
        drop(Box::from_raw(dec));
    }
}

/// Decodes one `n x n` array of channel LLRs (row-major, `len = n * n`)
/// into hard decisions. `reference` (the transmitted array) may be null
/// except for the genie-aided decoder.
///
/// # Safety
/// `llr` must hold `len` values, `reference` null or `len` bytes, and
/// `decisions` room for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn prodec_pc_decode(
    dec: *const ProdecPcDecoder,
    llr: *const f64,
    len: usize,
    sigma: f64,
    reference: *const u8,
    decisions: *mut u8,
) -> ProdecStatus {
    guard(|| {
        let d = dec.as_ref().ok_or_else(|| null("decoder"))?;
        let n = d.code.n();
        check_len(n * n, len)?;
        let l = input(llr, len, "llr")?;
        let r = if reference.is_null() {
            None
        } else {
            Some(input(reference, len, "reference")?)
        };
        let out = output(decisions, len, "decisions")?;
        let grid = LlrGrid::new(n, n, l.to_vec(), sigma).map_err(lib)?;
        let res = PcDecoder::new(&d.code, d.kind, d.schedule, d.lut.as_ref())
            .map_err(lib)?
            .with_packed_messages(d.packed)
            .decode(&grid, r)
            .map_err(lib)?;
        out.copy_from_slice(&res.decisions);
        Ok(())
    })
}
