//! Block arithmetic on shared-exponent operands with cost instrumentation.
//!
//! Each operation models a SIMD-style pipeline: significands are aligned by
//! barrel shifts, accumulated in wide sign/magnitude registers, and the
//! result is renormalized onto a fresh shared exponent and re-boxed. The
//! counters tally that pipeline's work — one `mantissa_scaling` per real
//! significand routed through a shift stage, one `exponent_op` per
//! add/subtract/compare on an exponent field — gated on non-zero data, so
//! measured counts never exceed the worst-case model in [`predicted_costs`]
//! and reach it exactly when every component carries data.
//!
//! Stage model per operation (worst case, per complex sample or term):
//!
//! * add: pre-align the shift-designated side (both sides under box
//!   encoding), then one output stage per component (normalize + box-align
//!   under box encoding). Shared-exponent work is one difference plus the
//!   output update, plus the two boxed frame variants.
//! * multiply: four partial products each pass an alignment stage, the two
//!   pair-combines and the two output components each pass one more; box
//!   encoding doubles every stage (base shift plus box offset) and needs
//!   three extra frame variants for the four intermediate exponent offsets
//!   {0, -B_m, -B_m, -2B_m}.
//! * convolution: each product term costs four partial alignments plus two
//!   combines into the running accumulators (box doubles the partials),
//!   and each accumulation step re-aligns and rescales both components.
//!   Exponent work is three frame updates per output plus one final.

use num_complex::Complex64;

use crate::codec::{BlockMode, CbfpBlock, Encoding};
use crate::error::{Error, Result};
use crate::ieee::{FloatFormat, ScalarFields};

/// Guard bits kept beyond the double-width product in accumulators.
const GUARD_BITS: u32 = 8;

/// Tallies of one block operation. Reset at the start of every call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCostCounters {
    /// Barrel shifts of one real significand.
    pub mantissa_scalings: u64,
    /// Adds/subtracts/compares on exponent fields.
    pub exponent_ops: u64,
    /// Complex multiplications performed.
    pub complex_mults: u64,
    /// Complex additions performed.
    pub complex_adds: u64,
}

impl OpCostCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// CSV row in the fixed export schema.
    pub fn csv_row(&self, op: &str, mode: &str, n1: usize, n2: usize) -> String {
        format!(
            "{op},{mode},{n1},{n2},{},{},{},{}",
            self.mantissa_scalings, self.exponent_ops, self.complex_mults, self.complex_adds
        )
    }
}

/// Block operation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AluOp {
    Add,
    Mul,
    Conv,
}

impl AluOp {
    pub fn name(self) -> &'static str {
        match self {
            AluOp::Add => "add",
            AluOp::Mul => "mul",
            AluOp::Conv => "conv",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "add" => Ok(AluOp::Add),
            "mul" => Ok(AluOp::Mul),
            "conv" => Ok(AluOp::Conv),
            other => Err(Error::InvalidArgument(format!(
                "unknown op '{other}' (expected add, mul, or conv)"
            ))),
        }
    }
}

/// Worst-case mantissa-scaling and exponent-arithmetic counts for one block
/// operation, with the structural complex multiply/add totals.
///
/// For `Add` and `Mul`, `n1` is the block length and `n2` is ignored. The
/// convolution rows compose the per-sample costs over `n1*n2` products and
/// `(n1-1)*(n2-1)` accumulations.
pub fn predicted_costs(op: AluOp, encoding: Encoding, n1: u64, n2: u64) -> OpCostCounters {
    match op {
        AluOp::Add => {
            let n = n1;
            let (mantissa_scalings, exponent_ops) = match encoding {
                Encoding::Ieee754 => (4 * n, 2 * n),
                Encoding::Common => (4 * n, 2),
                Encoding::Box => (8 * n, 4),
            };
            OpCostCounters {
                mantissa_scalings,
                exponent_ops,
                complex_mults: 0,
                complex_adds: n,
            }
        }
        AluOp::Mul => {
            let n = n1;
            let (mantissa_scalings, exponent_ops) = match encoding {
                Encoding::Ieee754 => (8 * n, 6 * n),
                Encoding::Common => (8 * n, 2),
                Encoding::Box => (16 * n, 5),
            };
            OpCostCounters {
                mantissa_scalings,
                exponent_ops,
                complex_mults: n,
                complex_adds: 0,
            }
        }
        AluOp::Conv => {
            let products = n1 * n2;
            let adds = (n1 - 1) * (n2 - 1);
            let (mantissa_scalings, exponent_ops) = match encoding {
                Encoding::Ieee754 => (6 * products + 4 * adds, 6 * products + 2 * adds),
                Encoding::Common => (6 * products + 4 * adds, 3 * (n1 + n2 - 1) + 1),
                Encoding::Box => (10 * products + 8 * adds, 3 * (n1 + n2 - 1) + 1),
            };
            OpCostCounters {
                mantissa_scalings,
                exponent_ops,
                complex_mults: products,
                complex_adds: adds,
            }
        }
    }
}

/// Sign/magnitude accumulator with a single running exponent.
///
/// Holds intermediate products and sums before renormalization. `mag` is
/// kept below `2^(2*B_m + GUARD_BITS)`; alignment shifts beyond the window
/// clamp the small side to an exact zero contribution.
#[derive(Debug, Clone, Copy)]
pub struct WideAccumulator {
    negative: bool,
    magnitude: u128,
    /// Unbiased exponent of the magnitude's least significant bit.
    lsb_exponent: i64,
    width_cap: u32,
    format: FloatFormat,
}

impl WideAccumulator {
    pub fn new(format: FloatFormat) -> Self {
        WideAccumulator {
            negative: false,
            magnitude: 0,
            lsb_exponent: 0,
            width_cap: 2 * format.mantissa_width() + GUARD_BITS,
            format,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude == 0
    }

    fn check_invariants(&self) {
        debug_assert!(self.magnitude >> self.width_cap == 0);
        let bound = 1i64 << (self.format.exponent_width() + 2);
        debug_assert!(self.lsb_exponent.abs() <= bound, "accumulator exponent wrapped");
    }

    /// Fold `±mag * 2^lsb_exponent` into the running value.
    ///
    /// Both sides are aligned to a common grid, exactly when the combined
    /// span fits the window, otherwise truncated toward zero from below.
    pub fn add_term(&mut self, negative: bool, mag: u128, lsb_exponent: i64) {
        if mag == 0 {
            return;
        }
        if self.magnitude == 0 {
            let msb = 127 - mag.leading_zeros();
            let excess = msb as i64 - (self.width_cap as i64 - 1);
            if excess > 0 {
                self.magnitude = mag >> excess;
                self.lsb_exponent = lsb_exponent + excess;
            } else {
                self.magnitude = mag;
                self.lsb_exponent = lsb_exponent;
            }
            self.negative = negative;
            self.check_invariants();
            return;
        }
        let self_top = self.lsb_exponent + (127 - self.magnitude.leading_zeros()) as i64;
        let term_top = lsb_exponent + (127 - mag.leading_zeros()) as i64;
        // Finest grid such that both operands and a carry still fit.
        let grid = (self_top.max(term_top) + 2 - self.width_cap as i64)
            .max(self.lsb_exponent.min(lsb_exponent));
        let a = shift_signed(self.negative, self.magnitude, self.lsb_exponent - grid);
        let b = shift_signed(negative, mag, lsb_exponent - grid);
        let sum = a + b;
        self.negative = sum < 0;
        self.magnitude = sum.unsigned_abs();
        self.lsb_exponent = grid;
        self.check_invariants();
    }

    /// Truncate to a normalized component of at most `B_m + 1` significand
    /// bits at its own exponent.
    fn to_packed(&self) -> Packed {
        Packed::from_wide(self.negative, self.magnitude, self.lsb_exponent, self.format)
    }
}

/// Align a magnitude to a grid `delta` positions below its own; negative
/// `delta` truncates toward zero, and shifts past the width clamp to zero.
fn shift_signed(negative: bool, mag: u128, delta: i64) -> i128 {
    let shifted = if delta >= 0 {
        debug_assert!(delta < 128);
        mag << delta
    } else if -delta >= 128 {
        0
    } else {
        mag >> (-delta)
    };
    if negative {
        -(shifted as i128)
    } else {
        shifted as i128
    }
}

/// Normalized real component ready for block packing:
/// value = ±sig * 2^(exponent - bias - B_m), sig's top bit at B_m (or 0).
#[derive(Debug, Clone, Copy)]
struct Packed {
    negative: bool,
    sig: u64,
    exponent: i64,
}

impl Packed {
    const ZERO: Packed = Packed {
        negative: false,
        sig: 0,
        exponent: 0,
    };

    fn is_zero(&self) -> bool {
        self.sig == 0
    }

    /// Truncate `±mag * 2^lsb_exponent` (unbiased) to B_m+1 significand bits.
    fn from_wide(negative: bool, mag: u128, lsb_exponent: i64, fmt: FloatFormat) -> Packed {
        if mag == 0 {
            return Packed::ZERO;
        }
        let b_m = fmt.mantissa_width();
        let msb = (127 - mag.leading_zeros()) as i64;
        let sig = if msb >= b_m as i64 {
            (mag >> (msb - b_m as i64)) as u64
        } else {
            (mag as u64) << (b_m as i64 - msb)
        };
        Packed {
            negative,
            sig,
            exponent: lsb_exponent + msb + fmt.bias() as i64,
        }
    }

    /// Exact sum of two packed components.
    ///
    /// Alignment gaps beyond the accumulator window clamp the small side to
    /// zero; the result is truncated back to B_m+1 bits.
    fn add(self, other: Packed, fmt: FloatFormat) -> Packed {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let b_m = fmt.mantissa_width() as i64;
        let (hi, lo) = if self.exponent >= other.exponent {
            (self, other)
        } else {
            (other, self)
        };
        let gap = hi.exponent - lo.exponent;
        if gap > b_m + GUARD_BITS as i64 {
            return hi;
        }
        let sum = shift_signed(hi.negative, hi.sig as u128, gap)
            + shift_signed(lo.negative, lo.sig as u128, 0);
        let lsb = (lo.exponent - fmt.bias() as i64) - b_m;
        Packed::from_wide(sum < 0, sum.unsigned_abs(), lsb, fmt)
    }

    fn negate(self) -> Packed {
        Packed {
            negative: !self.negative && !self.is_zero(),
            ..self
        }
    }
}

/// One operand component in the point-exponent domain:
/// value = ±sig * 2^(exponent - bias - B_m) with `exponent = E - B_m * X`.
#[derive(Debug, Clone, Copy)]
struct Operand {
    negative: bool,
    sig: u64,
    exponent: i64,
}

impl Operand {
    fn from_block(block: &CbfpBlock, i: usize) -> Operand {
        let b_m = block.format().mantissa_width() as i64;
        Operand {
            negative: block.sign(i),
            sig: block.significand(i),
            exponent: block.common_exponent() as i64 - b_m * block.box_shift(i) as i64,
        }
    }

    fn is_zero(&self) -> bool {
        self.sig == 0
    }

    /// Unbiased exponent of the significand's least significant bit.
    fn lsb_exponent(&self, fmt: FloatFormat) -> i64 {
        self.exponent - fmt.bias() as i64 - fmt.mantissa_width() as i64
    }
}

fn output_mode(a: &CbfpBlock, b: &CbfpBlock) -> BlockMode {
    if a.mode() == BlockMode::Box || b.mode() == BlockMode::Box {
        BlockMode::Box
    } else {
        BlockMode::Common
    }
}

fn check_formats(a: &CbfpBlock, b: &CbfpBlock) -> Result<FloatFormat> {
    if a.format() != b.format() {
        return Err(Error::FormatMismatch);
    }
    Ok(a.format())
}

fn check_sizes(a: &CbfpBlock, b: &CbfpBlock) -> Result<usize> {
    if a.n_samples() != b.n_samples() {
        return Err(Error::BlockSizeMismatch {
            left: a.n_samples(),
            right: b.n_samples(),
        });
    }
    Ok(a.n_samples())
}

/// Renormalize packed components onto a fresh shared exponent and re-box.
fn assemble_block(
    packed: &[Packed],
    fmt: FloatFormat,
    mode: BlockMode,
    n_samples: usize,
) -> Result<CbfpBlock> {
    let mut e_out: i64 = 0;
    for p in packed {
        if !p.is_zero() && p.exponent >= 1 {
            e_out = e_out.max(p.exponent);
        }
    }
    if e_out > fmt.max_biased_exponent() as i64 {
        return Err(Error::ExponentOverflow);
    }
    let mask = (1u64 << fmt.mantissa_width()) - 1;
    let fields: Vec<ScalarFields> = packed
        .iter()
        .map(|p| {
            if p.is_zero() || p.exponent < 1 {
                ScalarFields::zero(fmt)
            } else {
                ScalarFields {
                    sign: p.negative,
                    exponent: p.exponent as u32,
                    mantissa: p.sig & mask,
                    format: fmt,
                }
            }
        })
        .collect();
    Ok(CbfpBlock::from_fields(&fields, fmt, mode, e_out as u32, n_samples))
}

/// Component-wise complex sum of two blocks.
///
/// Box bits fold into the alignment shift amounts before the mantissa
/// additions; the output is renormalized onto a fresh shared exponent and
/// re-boxed when either operand used box encoding.
pub fn block_add(a: &CbfpBlock, b: &CbfpBlock, counters: &mut OpCostCounters) -> Result<CbfpBlock> {
    counters.reset();
    let fmt = check_formats(a, b)?;
    let n = check_sizes(a, b)?;
    let mode = output_mode(a, b);
    let b_m = fmt.mantissa_width();

    // Shared-exponent work: one difference (which is also the compare), the
    // boxed shift-amount variants for each side, and the output update.
    counters.exponent_ops += 1;
    if mode == BlockMode::Box {
        counters.exponent_ops += 2;
    }
    counters.exponent_ops += 1;
    counters.complex_adds += n as u64;

    // On equal shared exponents operand A is the unshifted side.
    let a_is_shifted = a.common_exponent() < b.common_exponent();
    let frame_top = a.common_exponent().max(b.common_exponent()) as i64;
    let fraction = (b_m + 6) as i64;

    let mut packed = Vec::with_capacity(2 * n);
    for i in 0..2 * n {
        let xa = Operand::from_block(a, i);
        let xb = Operand::from_block(b, i);

        match mode {
            BlockMode::Common => {
                let shifted = if a_is_shifted { &xa } else { &xb };
                if !shifted.is_zero() {
                    counters.mantissa_scalings += 1;
                }
            }
            BlockMode::Box => {
                counters.mantissa_scalings += !xa.is_zero() as u64 + !xb.is_zero() as u64;
            }
        }

        let term = |x: &Operand| -> i128 {
            if x.is_zero() {
                return 0;
            }
            let gap = frame_top - x.exponent;
            let mag = if gap <= fraction {
                (x.sig as u128) << (fraction - gap)
            } else if gap - fraction >= 64 {
                0
            } else {
                (x.sig >> (gap - fraction)) as u128
            };
            if x.negative {
                -(mag as i128)
            } else {
                mag as i128
            }
        };
        let sum = term(&xa) + term(&xb);
        if sum != 0 {
            counters.mantissa_scalings += match mode {
                BlockMode::Common => 1,
                BlockMode::Box => 2,
            };
        }
        let lsb = frame_top - fmt.bias() as i64 - b_m as i64 - fraction;
        packed.push(Packed::from_wide(sum < 0, sum.unsigned_abs(), lsb, fmt));
    }
    assemble_block(&packed, fmt, mode, n)
}

/// Element-wise complex product of two blocks.
///
/// Each sample forms four real products, truncated at their own exponent,
/// then combines them with two aligned additions before the shared-exponent
/// renormalization.
pub fn block_mul(a: &CbfpBlock, b: &CbfpBlock, counters: &mut OpCostCounters) -> Result<CbfpBlock> {
    counters.reset();
    let fmt = check_formats(a, b)?;
    let n = check_sizes(a, b)?;
    let mode = output_mode(a, b);
    counters.complex_mults += n as u64;

    // Product frame sum, the three extra boxed offsets, then the output.
    counters.exponent_ops += 1;
    if mode == BlockMode::Box {
        counters.exponent_ops += 3;
    }
    counters.exponent_ops += 1;

    let stage = match mode {
        BlockMode::Common => 1u64,
        BlockMode::Box => 2u64,
    };

    let mut packed = Vec::with_capacity(2 * n);
    for k in 0..n {
        let ar = Operand::from_block(a, 2 * k);
        let ai = Operand::from_block(a, 2 * k + 1);
        let br = Operand::from_block(b, 2 * k);
        let bi = Operand::from_block(b, 2 * k + 1);

        let mut product = |x: &Operand, y: &Operand| -> Packed {
            if x.is_zero() || y.is_zero() {
                return Packed::ZERO;
            }
            counters.mantissa_scalings += stage;
            let mag = x.sig as u128 * y.sig as u128;
            let lsb = x.lsb_exponent(fmt) + y.lsb_exponent(fmt);
            Packed::from_wide(x.negative != y.negative, mag, lsb, fmt)
        };
        let p1 = product(&ar, &br);
        let p2 = product(&ai, &bi);
        let p3 = product(&ar, &bi);
        let p4 = product(&ai, &br);

        if !(p1.is_zero() && p2.is_zero()) {
            counters.mantissa_scalings += stage;
        }
        if !(p3.is_zero() && p4.is_zero()) {
            counters.mantissa_scalings += stage;
        }
        let y_re = p1.add(p2.negate(), fmt);
        let y_im = p3.add(p4, fmt);

        counters.mantissa_scalings += stage * !y_re.is_zero() as u64;
        counters.mantissa_scalings += stage * !y_im.is_zero() as u64;
        packed.push(y_re);
        packed.push(y_im);
    }
    assemble_block(&packed, fmt, mode, n)
}

/// Full linear convolution of two blocks (lengths may differ).
///
/// The shorter operand is taken as the filter; each output term accumulates
/// raw double-width products in a pair of [`WideAccumulator`]s with a single
/// running exponent per output component, then the whole result is
/// renormalized and re-boxed once.
pub fn block_conv(
    a: &CbfpBlock,
    b: &CbfpBlock,
    counters: &mut OpCostCounters,
) -> Result<CbfpBlock> {
    counters.reset();
    let fmt = check_formats(a, b)?;
    if a.n_samples() == 0 || b.n_samples() == 0 {
        return Err(Error::InvalidArgument("convolution operands must be non-empty".into()));
    }
    let (x, y) = if a.n_samples() <= b.n_samples() {
        (a, b)
    } else {
        (b, a)
    };
    let n1 = x.n_samples();
    let n2 = y.n_samples();
    let n_out = n1 + n2 - 1;
    let mode = output_mode(a, b);
    let stage = match mode {
        BlockMode::Common => 1u64,
        BlockMode::Box => 2u64,
    };

    counters.complex_mults += (n1 * n2) as u64;
    counters.complex_adds += ((n1 - 1) * (n2 - 1)) as u64;

    let mut any_output_live = false;
    let mut packed = Vec::with_capacity(2 * n_out);
    for out_idx in 0..n_out {
        let mut acc_re = WideAccumulator::new(fmt);
        let mut acc_im = WideAccumulator::new(fmt);
        let lo = out_idx.saturating_sub(n2 - 1);
        let hi = out_idx.min(n1 - 1);
        let mut output_live = false;
        for (step, i) in (lo..=hi).enumerate() {
            let j = out_idx - i;
            let ar = Operand::from_block(x, 2 * i);
            let ai = Operand::from_block(x, 2 * i + 1);
            let br = Operand::from_block(y, 2 * j);
            let bi = Operand::from_block(y, 2 * j + 1);

            let mut term_live = false;
            let mut partial = |p: &Operand, q: &Operand, negate: bool, acc: &mut WideAccumulator| {
                if p.is_zero() || q.is_zero() {
                    return;
                }
                term_live = true;
                counters.mantissa_scalings += stage;
                let mag = p.sig as u128 * q.sig as u128;
                let lsb = p.lsb_exponent(fmt) + q.lsb_exponent(fmt);
                acc.add_term((p.negative != q.negative) != negate, mag, lsb);
            };
            // y_re += ar*br - ai*bi; y_im += ar*bi + ai*br
            partial(&ar, &br, false, &mut acc_re);
            partial(&ai, &bi, true, &mut acc_re);
            partial(&ar, &bi, false, &mut acc_im);
            partial(&ai, &br, false, &mut acc_im);

            if term_live {
                output_live = true;
                // Combine stages routing the paired products together.
                counters.mantissa_scalings += 2;
                if step > 0 {
                    // Accumulation: re-align the incoming term and rescale.
                    counters.mantissa_scalings += 4 * stage;
                }
            }
        }
        if output_live {
            any_output_live = true;
            counters.exponent_ops += 3;
        }
        packed.push(acc_re.to_packed());
        packed.push(acc_im.to_packed());
    }
    if any_output_live {
        counters.exponent_ops += 1;
    }
    assemble_block(&packed, fmt, mode, n_out)
}

/// Dispatch one block operation by selector.
pub fn run_block_op(
    op: AluOp,
    a: &CbfpBlock,
    b: &CbfpBlock,
    counters: &mut OpCostCounters,
) -> Result<CbfpBlock> {
    match op {
        AluOp::Add => block_add(a, b, counters),
        AluOp::Mul => block_mul(a, b, counters),
        AluOp::Conv => block_conv(a, b, counters),
    }
}

fn truncate_complex(v: Complex64, fmt: FloatFormat) -> Result<Complex64> {
    Ok(Complex64::new(fmt.truncate(v.re)?, fmt.truncate(v.im)?))
}

/// Per-scalar complex sum with the plain per-sample cost model.
///
/// Every real addition with two non-zero operands costs one pre-align and
/// one post-normalize shift plus one exponent difference.
pub fn ieee_block_add(
    a: &[Complex64],
    b: &[Complex64],
    fmt: FloatFormat,
    counters: &mut OpCostCounters,
) -> Result<Vec<Complex64>> {
    counters.reset();
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    counters.complex_adds += a.len() as u64;
    let mut real_add = |x: f64, y: f64| -> Result<f64> {
        if x != 0.0 && y != 0.0 {
            counters.mantissa_scalings += 2;
            counters.exponent_ops += 1;
        }
        fmt.truncate(x + y)
    };
    a.iter()
        .zip(b)
        .map(|(p, q)| Ok(Complex64::new(real_add(p.re, q.re)?, real_add(p.im, q.im)?)))
        .collect()
}

/// Per-scalar element-wise complex product with the plain cost model.
///
/// Each of the four real products costs one normalize shift and one
/// exponent add; each of the two combining additions costs two shifts and
/// one exponent difference.
pub fn ieee_block_mul(
    a: &[Complex64],
    b: &[Complex64],
    fmt: FloatFormat,
    counters: &mut OpCostCounters,
) -> Result<Vec<Complex64>> {
    counters.reset();
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    counters.complex_mults += a.len() as u64;
    let mut out = Vec::with_capacity(a.len());
    for (p, q) in a.iter().zip(b) {
        let mut product = |x: f64, y: f64| -> Result<f64> {
            if x != 0.0 && y != 0.0 {
                counters.mantissa_scalings += 1;
                counters.exponent_ops += 1;
            }
            fmt.truncate(x * y)
        };
        let p1 = product(p.re, q.re)?;
        let p2 = product(p.im, q.im)?;
        let p3 = product(p.re, q.im)?;
        let p4 = product(p.im, q.re)?;
        let mut combine = |x: f64, y: f64| -> Result<f64> {
            if x != 0.0 && y != 0.0 {
                counters.mantissa_scalings += 2;
                counters.exponent_ops += 1;
            }
            fmt.truncate(x + y)
        };
        out.push(Complex64::new(combine(p1, -p2)?, combine(p3, p4)?));
    }
    Ok(out)
}

/// Per-scalar direct-form convolution with the plain cost model.
///
/// Within the accumulation each product term costs four normalize shifts
/// and two combine shifts (four plus two exponent ops), and each
/// accumulation step costs another align/normalize pair per component.
pub fn ieee_block_conv(
    a: &[Complex64],
    b: &[Complex64],
    fmt: FloatFormat,
    counters: &mut OpCostCounters,
) -> Result<Vec<Complex64>> {
    counters.reset();
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("convolution operands must be non-empty".into()));
    }
    let (x, y) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let n1 = x.len();
    let n2 = y.len();
    counters.complex_mults += (n1 * n2) as u64;
    counters.complex_adds += ((n1 - 1) * (n2 - 1)) as u64;

    let mut out = Vec::with_capacity(n1 + n2 - 1);
    for out_idx in 0..n1 + n2 - 1 {
        let lo = out_idx.saturating_sub(n2 - 1);
        let hi = out_idx.min(n1 - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for (step, i) in (lo..=hi).enumerate() {
            let j = out_idx - i;
            let (p, q) = (x[i], y[j]);
            let mut live = 0u64;
            let mut product = |u: f64, v: f64| -> Result<f64> {
                if u != 0.0 && v != 0.0 {
                    live += 1;
                }
                fmt.truncate(u * v)
            };
            let p1 = product(p.re, q.re)?;
            let p2 = product(p.im, q.im)?;
            let p3 = product(p.re, q.im)?;
            let p4 = product(p.im, q.re)?;
            counters.mantissa_scalings += live;
            counters.exponent_ops += live;
            let term_live = live > 0;
            if term_live {
                counters.mantissa_scalings += 2;
                counters.exponent_ops += 2;
            }
            let term = Complex64::new(
                fmt.truncate(p1 - p2)?,
                fmt.truncate(p3 + p4)?,
            );
            if step > 0 && term_live {
                counters.mantissa_scalings += 4;
                counters.exponent_ops += 2;
            }
            acc = truncate_complex(acc + term, fmt)?;
        }
        out.push(acc);
    }
    Ok(out)
}
