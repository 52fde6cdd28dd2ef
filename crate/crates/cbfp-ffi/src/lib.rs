//! C ABI over the block floating-point toolkit.
//!
//! Blocks are opaque handles created by `cbfp_block_encode` (or the block
//! operations) and released with `cbfp_block_free`. Every fallible call
//! returns a `CbfpStatus`; out-parameters are written only on
//! `CBFP_STATUS_OK`. Pointers must be valid for the stated lengths; null
//! pointers are rejected, not dereferenced.

use std::ffi::CStr;
use std::os::raw::c_char;


use cbfp_core::alu;
use cbfp_core::codec;
use cbfp_core::error::Error;
use cbfp_core::ieee::FloatFormat;
use cbfp_core::metrics;
use cbfp_core::qam;
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbfpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedValue = 3,
    FormatMismatch = 4,
    BlockSizeMismatch = 5,
    ExponentOverflow = 6,
    LengthMismatch = 7,
    ZeroReference = 8,
    AllZero = 9,
    RatioOutOfRange = 10,
    OffsetOutOfRange = 11,
    InvalidRolloff = 12,
    BadBitCount = 13,
    InvalidFile = 14,
    IoError = 15,
}

/// Scalar storage width of block components.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbfpFormat {
    Half = 0,
    Single = 1,
    Double = 2,
}

/// Block encoding variant.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbfpMode {
    Common = 0,
    Box = 1,
}

/// Sample representation, including the per-scalar baseline.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbfpEncoding {
    Ieee754 = 0,
    Common = 1,
    Box = 2,
}

/// Block operation selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbfpOp {
    Add = 0,
    Mul = 1,
    Conv = 2,
}

/// Cost tallies of one block operation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CbfpCounters {
    pub mantissa_scalings: u64,
    pub exponent_ops: u64,
    pub complex_mults: u64,
    pub complex_adds: u64,
}

/// Opaque block handle.
pub struct CbfpBlock {
    inner: codec::CbfpBlock,
}

fn status_of(err: &Error) -> CbfpStatus {
    match err {
        Error::UnsupportedValue(_) => CbfpStatus::UnsupportedValue,
        Error::FormatMismatch => CbfpStatus::FormatMismatch,
        Error::BlockSizeMismatch { .. } => CbfpStatus::BlockSizeMismatch,
        Error::ExponentOverflow => CbfpStatus::ExponentOverflow,
        Error::LengthMismatch { .. } => CbfpStatus::LengthMismatch,
        Error::ZeroReference => CbfpStatus::ZeroReference,
        Error::AllZero => CbfpStatus::AllZero,
        Error::RatioOutOfRange(_) => CbfpStatus::RatioOutOfRange,
        Error::OffsetOutOfRange { .. } => CbfpStatus::OffsetOutOfRange,
        Error::BitCountNotMultipleOfJ { .. } => CbfpStatus::BadBitCount,
        Error::InvalidRolloff(_) => CbfpStatus::InvalidRolloff,
        Error::InvalidBlockFile(_) => CbfpStatus::InvalidFile,
        Error::InvalidConfig { .. } => CbfpStatus::InvalidArgument,
        Error::InvalidArgument(_) => CbfpStatus::InvalidArgument,
        Error::Io(_) => CbfpStatus::IoError,
    }
}

fn format_of(fmt: CbfpFormat) -> FloatFormat {
    match fmt {
        CbfpFormat::Half => FloatFormat::Half,
        CbfpFormat::Single => FloatFormat::Single,
        CbfpFormat::Double => FloatFormat::Double,
    }
}

fn mode_of(mode: CbfpMode) -> codec::BlockMode {
    match mode {
        CbfpMode::Common => codec::BlockMode::Common,
        CbfpMode::Box => codec::BlockMode::Box,
    }
}

fn encoding_of(encoding: CbfpEncoding) -> codec::Encoding {
    match encoding {
        CbfpEncoding::Ieee754 => codec::Encoding::Ieee754,
        CbfpEncoding::Common => codec::Encoding::Common,
        CbfpEncoding::Box => codec::Encoding::Box,
    }
}

fn counters_out(counters: *mut CbfpCounters, c: &alu::OpCostCounters) {
    if !counters.is_null() {
        unsafe {
            *counters = CbfpCounters {
                mantissa_scalings: c.mantissa_scalings,
                exponent_ops: c.exponent_ops,
                complex_mults: c.complex_mults,
                complex_adds: c.complex_adds,
            };
        }
    }
}

unsafe fn gather(re: *const f64, im: *const f64, n: usize) -> Vec<Complex64> {
    let re = std::slice::from_raw_parts(re, n);
    let im = std::slice::from_raw_parts(im, n);
    re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
}

/// Encode `n_samples` complex values (parallel real/imaginary arrays) into
/// a new block. The handle must be released with `cbfp_block_free`.
///
/// # Safety
/// `re` and `im` must point to `n_samples` readable doubles and
/// `out_block` to a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn cbfp_block_encode(
    format: CbfpFormat,
    mode: CbfpMode,
    re: *const f64,
    im: *const f64,
    n_samples: usize,
    out_block: *mut *mut CbfpBlock,
) -> CbfpStatus {
    if re.is_null() || im.is_null() || out_block.is_null() {
        return CbfpStatus::NullPointer;
    }
    let samples = gather(re, im, n_samples);
    match codec::CbfpBlock::encode(&samples, format_of(format), mode_of(mode)) {
        Ok(block) => {
            *out_block = Box::into_raw(Box::new(CbfpBlock { inner: block }));
            CbfpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Decode a block into parallel real/imaginary arrays of length
/// `n_samples`, which must match `cbfp_block_n_samples`.
///
/// # Safety
/// `re_out` and `im_out` must point to `n_samples` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cbfp_block_decode(
    block: *const CbfpBlock,
    re_out: *mut f64,
    im_out: *mut f64,
    n_samples: usize,
) -> CbfpStatus {
    let Some(block) = block.as_ref() else {
        return CbfpStatus::NullPointer;
    };
    if re_out.is_null() || im_out.is_null() {
        return CbfpStatus::NullPointer;
    }
    if n_samples != block.inner.n_samples() {
        return CbfpStatus::LengthMismatch;
    }
    for (k, v) in block.inner.decode().into_iter().enumerate() {
        *re_out.add(k) = v.re;
        *im_out.add(k) = v.im;
    }
    CbfpStatus::Ok
}

/// Release a block handle. Null is a no-op.
///
/// # Safety
/// `block` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cbfp_block_free(block: *mut CbfpBlock) {
    if !block.is_null() {
        drop(Box::from_raw(block));
    }
}

/// Number of complex samples, or 0 for null.
///
/// # Safety
/// `block` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn cbfp_block_n_samples(block: *const CbfpBlock) -> usize {
    block.as_ref().map_or(0, |b| b.inner.n_samples())
}

/// Shared biased exponent of the block.
///
/// # Safety
/// `block` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn cbfp_block_common_exponent(block: *const CbfpBlock) -> u32 {
    block.as_ref().map_or(0, |b| b.inner.common_exponent())
}

fn run_op(
    op: CbfpOp,
    a: &codec::CbfpBlock,
    b: &codec::CbfpBlock,
    counters: *mut CbfpCounters,
) -> Result<codec::CbfpBlock, Error> {
    let mut c = alu::OpCostCounters::new();
    let result = match op {
        CbfpOp::Add => alu::block_add(a, b, &mut c),
        CbfpOp::Mul => alu::block_mul(a, b, &mut c),
        CbfpOp::Conv => alu::block_conv(a, b, &mut c),
    }?;
    counters_out(counters, &c);
    Ok(result)
}

/// Run one block operation; writes the cost tallies when `counters` is
/// non-null and a fresh handle into `out_block`.
///
/// # Safety
/// `a` and `b` must be live handles; `out_block` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cbfp_block_op(
    op: CbfpOp,
    a: *const CbfpBlock,
    b: *const CbfpBlock,
    counters: *mut CbfpCounters,
    out_block: *mut *mut CbfpBlock,
) -> CbfpStatus {
    let (Some(a), Some(b)) = (a.as_ref(), b.as_ref()) else {
        return CbfpStatus::NullPointer;
    };
    if out_block.is_null() {
        return CbfpStatus::NullPointer;
    }
    match run_op(op, &a.inner, &b.inner, counters) {
        Ok(block) => {
            *out_block = Box::into_raw(Box::new(CbfpBlock { inner: block }));
            CbfpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Worst-case cost model for one operation. For add and multiply `n2` is
/// ignored; convolution uses both operand lengths.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cbfp_predicted_costs(
    op: CbfpOp,
    encoding: CbfpEncoding,
    n1: u64,
    n2: u64,
    out: *mut CbfpCounters,
) -> CbfpStatus {
    if out.is_null() {
        return CbfpStatus::NullPointer;
    }
    if n1 == 0 || n2 == 0 {
        return CbfpStatus::InvalidArgument;
    }
    let alu_op = match op {
        CbfpOp::Add => alu::AluOp::Add,
        CbfpOp::Mul => alu::AluOp::Mul,
        CbfpOp::Conv => alu::AluOp::Conv,
    };
    counters_out(out, &alu::predicted_costs(alu_op, encoding_of(encoding), n1, n2));
    CbfpStatus::Ok
}

/// Bits needed to store a block of `n_samples` complex values.
#[no_mangle]
pub extern "C" fn cbfp_wordlength_bits(
    encoding: CbfpEncoding,
    n_samples: usize,
    format: CbfpFormat,
) -> u64 {
    codec::wordlength_bits(encoding_of(encoding), n_samples, format_of(format))
}

/// Largest exponent gap that still keeps a significand bit under common
/// encoding.
#[no_mangle]
pub extern "C" fn cbfp_max_exponent_difference(format: CbfpFormat) -> u32 {
    codec::max_exponent_difference(format_of(format))
}

/// Classify an exponent pair against the effective encoding region;
/// writes 1 for inside, 0 for outside.
///
/// # Safety
/// `out_inside` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cbfp_eer_classify(
    e_re: u32,
    e_im: u32,
    e_max: u32,
    format: CbfpFormat,
    mode: CbfpMode,
    out_inside: *mut i32,
) -> CbfpStatus {
    if out_inside.is_null() {
        return CbfpStatus::NullPointer;
    }
    if e_re > e_max || e_im > e_max {
        return CbfpStatus::InvalidArgument;
    }
    let region = codec::eer_classify(e_re, e_im, e_max, format_of(format), mode_of(mode));
    *out_inside = (region == codec::EerRegion::Inside) as i32;
    CbfpStatus::Ok
}

/// RMS error-vector magnitude in percent between two complex sequences
/// given as parallel real/imaginary arrays of length `n`.
///
/// # Safety
/// All four input pointers must reference `n` readable doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn cbfp_evm_percent(
    ref_re: *const f64,
    ref_im: *const f64,
    test_re: *const f64,
    test_im: *const f64,
    n: usize,
    out: *mut f64,
) -> CbfpStatus {
    if ref_re.is_null() || ref_im.is_null() || test_re.is_null() || test_im.is_null() || out.is_null()
    {
        return CbfpStatus::NullPointer;
    }
    let reference = gather(ref_re, ref_im, n);
    let test = gather(test_re, test_im, n);
    match metrics::evm_percent(&reference, &test) {
        Ok(r) => {
            *out = r.evm_percent;
            CbfpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Ratio of largest to smallest non-zero magnitude, in dB.
///
/// # Safety
/// `values` must reference `n` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn cbfp_dynamic_range_db(
    values: *const f64,
    n: usize,
    out: *mut f64,
) -> CbfpStatus {
    if values.is_null() || out.is_null() {
        return CbfpStatus::NullPointer;
    }
    let slice = std::slice::from_raw_parts(values, n);
    match metrics::dynamic_range_db(slice) {
        Ok(r) => {
            *out = r;
            CbfpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Root-raised-cosine taps; `taps_len` must be `filter_order + 1`.
///
/// # Safety
/// `taps_out` must reference `taps_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cbfp_rrc_taps(
    alpha: f64,
    filter_order: u32,
    upsample: u32,
    taps_out: *mut f64,
    taps_len: usize,
) -> CbfpStatus {
    if taps_out.is_null() {
        return CbfpStatus::NullPointer;
    }
    if taps_len != filter_order as usize + 1 {
        return CbfpStatus::LengthMismatch;
    }
    match qam::rrc_taps(alpha, filter_order, upsample) {
        Ok(taps) => {
            for (k, t) in taps.into_iter().enumerate() {
                *taps_out.add(k) = t;
            }
            CbfpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

unsafe fn path_from(ptr: *const c_char) -> Result<std::path::PathBuf, CbfpStatus> {
    if ptr.is_null() {
        return Err(CbfpStatus::NullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(std::path::PathBuf::from(s)),
        Err(_) => Err(CbfpStatus::InvalidArgument),
    }
}

/// Serialize a block to a file in the 16-byte-header wire format.
///
/// # Safety
/// `block` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cbfp_block_write_file(
    block: *const CbfpBlock,
    path: *const c_char,
) -> CbfpStatus {
    let Some(block) = block.as_ref() else {
        return CbfpStatus::NullPointer;
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let mut file = match std::fs::File::create(path) {
        Ok(f) => f,
        Err(_) => return CbfpStatus::IoError,
    };
    match block.inner.write_to(&mut file) {
        Ok(()) => CbfpStatus::Ok,
        Err(e) => status_of(&e),
    }
}

/// Read a serialized block from a file into a fresh handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_block` writable.
#[no_mangle]
pub unsafe extern "C" fn cbfp_block_read_file(
    path: *const c_char,
    out_block: *mut *mut CbfpBlock,
) -> CbfpStatus {
    if out_block.is_null() {
        return CbfpStatus::NullPointer;
    }
    let path = match path_from(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let mut file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(_) => return CbfpStatus::IoError,
    };
    match codec::CbfpBlock::read_from(&mut file) {
        Ok(block) => {
            *out_block = Box::into_raw(Box::new(CbfpBlock { inner: block }));
            CbfpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_pointers_are_rejected() {
        unsafe {
            let mut out: *mut CbfpBlock = ptr::null_mut();
            assert_eq!(
                cbfp_block_encode(
                    CbfpFormat::Single,
                    CbfpMode::Box,
                    ptr::null(),
                    ptr::null(),
                    0,
                    &mut out
                ),
                CbfpStatus::NullPointer
            );
            assert_eq!(cbfp_block_n_samples(ptr::null()), 0);
            cbfp_block_free(ptr::null_mut());
        }
    }
}
