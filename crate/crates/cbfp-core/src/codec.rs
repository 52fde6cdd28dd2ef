//! Complex block floating-point encode/decode.
//!
//! A block holds `n_samples` complex values whose real and imaginary
//! components share a single biased exponent `E`. Each component keeps its
//! sign, its former implied leading bit (explicit once alignment may clear
//! it), an optional box-shift bit, and a mantissa. Component `i` decodes to
//!
//! ```text
//! v_i = (-1)^S_i * (L_i.M_i)_2 * 2^(E - bias - B_m * X_i)
//! ```
//!
//! Common encoding keeps `X_i = 0` and right-shifts each component's
//! significand by the gap to the block maximum, truncating toward zero.
//! Box encoding grants components more than `B_m` below the maximum an
//! extra factor of `2^B_m` (one bit per component), which doubles the
//! usable exponent span per axis before a component collapses to zero.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ieee::{assemble, split, FloatFormat, ScalarFields};

/// Block encoding variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockMode {
    Common,
    Box,
}

impl BlockMode {
    pub fn name(self) -> &'static str {
        match self {
            BlockMode::Common => "common",
            BlockMode::Box => "box",
        }
    }
}

/// Sample representation selector, including the plain per-scalar baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    Ieee754,
    Common,
    Box,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [Encoding::Ieee754, Encoding::Common, Encoding::Box];

    pub fn name(self) -> &'static str {
        match self {
            Encoding::Ieee754 => "ieee754",
            Encoding::Common => "common",
            Encoding::Box => "box",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ieee754" => Ok(Encoding::Ieee754),
            "common" => Ok(Encoding::Common),
            "box" => Ok(Encoding::Box),
            other => Err(Error::InvalidArgument(format!(
                "unknown encoding '{other}' (expected ieee754, common, or box)"
            ))),
        }
    }

    /// The block mode realizing this encoding, if it is a block encoding.
    pub fn block_mode(self) -> Option<BlockMode> {
        match self {
            Encoding::Ieee754 => None,
            Encoding::Common => Some(BlockMode::Common),
            Encoding::Box => Some(BlockMode::Box),
        }
    }
}

impl From<BlockMode> for Encoding {
    fn from(m: BlockMode) -> Self {
        match m {
            BlockMode::Common => Encoding::Common,
            BlockMode::Box => Encoding::Box,
        }
    }
}

/// A block of complex samples sharing one exponent.
///
/// Component arrays are interleaved (re, im) and have length
/// `2 * n_samples`. Blocks are immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbfpBlock {
    format: FloatFormat,
    mode: BlockMode,
    n_samples: usize,
    common_exponent: u32,
    signs: Vec<bool>,
    leads: Vec<bool>,
    box_shifts: Vec<bool>,
    mantissas: Vec<u64>,
}

impl CbfpBlock {
    pub fn format(&self) -> FloatFormat {
        self.format
    }

    pub fn mode(&self) -> BlockMode {
        self.mode
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Number of real components, 2 * n_samples.
    pub fn n_components(&self) -> usize {
        2 * self.n_samples
    }

    pub fn common_exponent(&self) -> u32 {
        self.common_exponent
    }

    pub fn sign(&self, i: usize) -> bool {
        self.signs[i]
    }

    pub fn lead(&self, i: usize) -> bool {
        self.leads[i]
    }

    pub fn box_shift(&self, i: usize) -> bool {
        self.box_shifts[i]
    }

    pub fn mantissa(&self, i: usize) -> u64 {
        self.mantissas[i]
    }

    /// Stored significand (L.M as an integer), zero iff the component is zero.
    pub fn significand(&self, i: usize) -> u64 {
        ((self.leads[i] as u64) << self.format.mantissa_width()) | self.mantissas[i]
    }

    /// Encode with the block maximum as the shared exponent; components more
    /// than one mantissa width below it lose all significand bits.
    pub fn encode_common(samples: &[Complex64], fmt: FloatFormat) -> Result<Self> {
        Self::encode(samples, fmt, BlockMode::Common)
    }

    /// Encode with one box-shift bit per component: a component more than
    /// `B_m` below the maximum trades its bit for an extra `2^B_m` scale,
    /// so it survives out to a gap of `2 * B_m`.
    pub fn encode_box(samples: &[Complex64], fmt: FloatFormat) -> Result<Self> {
        Self::encode(samples, fmt, BlockMode::Box)
    }

    pub fn encode(samples: &[Complex64], fmt: FloatFormat, mode: BlockMode) -> Result<Self> {
        let n = samples.len();
        let mut fields: Vec<ScalarFields> = Vec::with_capacity(2 * n);
        for s in samples {
            fields.push(split(s.re, fmt)?);
            fields.push(split(s.im, fmt)?);
        }
        let e_max = fields
            .iter()
            .filter(|f| !f.is_zero())
            .map(|f| f.exponent)
            .max()
            .unwrap_or(0);
        Ok(Self::from_fields(&fields, fmt, mode, e_max, n))
    }

    /// Pack pre-split components against a given shared exponent.
    ///
    /// `e_max` must be the maximum biased exponent over non-zero components.
    pub(crate) fn from_fields(
        fields: &[ScalarFields],
        fmt: FloatFormat,
        mode: BlockMode,
        e_max: u32,
        n_samples: usize,
    ) -> Self {
        let b_m = fmt.mantissa_width();
        let mask = (1u64 << b_m) - 1;
        let count = fields.len();
        let mut signs = Vec::with_capacity(count);
        let mut leads = Vec::with_capacity(count);
        let mut box_shifts = Vec::with_capacity(count);
        let mut mantissas = Vec::with_capacity(count);

        for f in fields {
            if f.is_zero() {
                signs.push(false);
                leads.push(false);
                box_shifts.push(false);
                mantissas.push(0);
                continue;
            }
            debug_assert!(f.exponent <= e_max);
            let mut boxed = false;
            let mut e_eff = f.exponent as i64;
            if mode == BlockMode::Box && e_eff < e_max as i64 - b_m as i64 {
                e_eff += b_m as i64;
                boxed = true;
            }
            let shift = (e_max as i64 - e_eff) as u32;
            let sig = (1u64 << b_m) | f.mantissa;
            let stored = if shift > b_m { 0 } else { sig >> shift };
            signs.push(f.sign);
            leads.push(stored >> b_m == 1);
            box_shifts.push(boxed);
            mantissas.push(stored & mask);
        }

        CbfpBlock {
            format: fmt,
            mode,
            n_samples,
            common_exponent: e_max,
            signs,
            leads,
            box_shifts,
            mantissas,
        }
    }

    /// Decode every component back to scalars, renormalizing into the
    /// block's format. Components whose renormalized exponent underflows
    /// the normal range decode to exact zero.
    pub fn decode(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n_samples);
        for k in 0..self.n_samples {
            let re = self.decode_component(2 * k);
            let im = self.decode_component(2 * k + 1);
            out.push(Complex64::new(re, im));
        }
        out
    }

    pub(crate) fn decode_component(&self, i: usize) -> f64 {
        let b_m = self.format.mantissa_width();
        let sig = self.significand(i);
        if sig == 0 {
            return 0.0;
        }
        let msb = 63 - sig.leading_zeros();
        let box_drop = if self.box_shifts[i] { b_m as i64 } else { 0 };
        let exponent = self.common_exponent as i64 - box_drop - (b_m as i64 - msb as i64);
        if exponent < 1 {
            return 0.0;
        }
        let mantissa = (sig << (b_m - msb)) & ((1u64 << b_m) - 1);
        assemble(&ScalarFields {
            sign: self.signs[i],
            exponent: exponent as u32,
            mantissa,
            format: self.format,
        })
    }

    /// Serialize: 16-byte header (magic, format tag, mode tag, sample count)
    /// followed by the packed bit layout, zero-padded to a byte boundary.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut header = [0u8; 16];
        header[..4].copy_from_slice(b"CBFP");
        header[4] = match self.format {
            FloatFormat::Half => 0,
            FloatFormat::Single => 1,
            FloatFormat::Double => 2,
        };
        header[5] = match self.mode {
            BlockMode::Common => 0,
            BlockMode::Box => 1,
        };
        let n = u32::try_from(self.n_samples)
            .map_err(|_| Error::InvalidArgument("block too large to serialize".into()))?;
        header[6..10].copy_from_slice(&n.to_le_bytes());
        w.write_all(&header)?;

        let b_m = self.format.mantissa_width();
        let mut bits = BitWriter::new();
        bits.push(self.common_exponent as u64, self.format.exponent_width());
        for i in 0..self.n_components() {
            bits.push(self.signs[i] as u64, 1);
            bits.push(self.leads[i] as u64, 1);
            if self.mode == BlockMode::Box {
                bits.push(self.box_shifts[i] as u64, 1);
            }
            bits.push(self.mantissas[i], b_m);
        }
        w.write_all(&bits.finish())?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != b"CBFP" {
            return Err(Error::InvalidBlockFile("bad magic".into()));
        }
        let format = match header[4] {
            0 => FloatFormat::Half,
            1 => FloatFormat::Single,
            2 => FloatFormat::Double,
            t => return Err(Error::InvalidBlockFile(format!("bad format tag {t}"))),
        };
        let mode = match header[5] {
            0 => BlockMode::Common,
            1 => BlockMode::Box,
            t => return Err(Error::InvalidBlockFile(format!("bad mode tag {t}"))),
        };
        let n_samples = u32::from_le_bytes(header[6..10].try_into().unwrap()) as usize;

        let payload_bits = wordlength_bits(Encoding::from(mode), n_samples, format);
        let payload_bytes = payload_bits.div_ceil(8) as usize;
        let mut payload = vec![0u8; payload_bytes];
        r.read_exact(&mut payload)?;

        let b_m = format.mantissa_width();
        let mut bits = BitReader::new(&payload);
        let common_exponent = bits.pull(format.exponent_width())? as u32;
        if common_exponent > format.max_biased_exponent() {
            return Err(Error::InvalidBlockFile(format!(
                "shared exponent {common_exponent} outside the normal range"
            )));
        }
        let count = 2 * n_samples;
        let mut signs = Vec::with_capacity(count);
        let mut leads = Vec::with_capacity(count);
        let mut box_shifts = Vec::with_capacity(count);
        let mut mantissas = Vec::with_capacity(count);
        for _ in 0..count {
            signs.push(bits.pull(1)? == 1);
            leads.push(bits.pull(1)? == 1);
            box_shifts.push(match mode {
                BlockMode::Common => false,
                BlockMode::Box => bits.pull(1)? == 1,
            });
            mantissas.push(bits.pull(b_m)?);
        }
        Ok(CbfpBlock {
            format,
            mode,
            n_samples,
            common_exponent,
            signs,
            leads,
            box_shifts,
            mantissas,
        })
    }
}

/// Bits needed to store a block of `n_samples` complex values.
///
/// Sign, lead, and box fields are one bit each; the shared exponent is
/// stored once for the block encodings and per component for the plain
/// per-scalar baseline.
pub fn wordlength_bits(encoding: Encoding, n_samples: usize, fmt: FloatFormat) -> u64 {
    let two_n = 2 * n_samples as u64;
    let b_e = fmt.exponent_width() as u64;
    let b_m = fmt.mantissa_width() as u64;
    match encoding {
        Encoding::Ieee754 => two_n * (1 + b_e + b_m),
        Encoding::Common => two_n * (1 + 1 + b_m) + b_e,
        Encoding::Box => two_n * (1 + 1 + 1 + b_m) + b_e,
    }
}

/// Largest exponent gap at which a component still keeps a significand bit
/// under common encoding; one more and it decodes to zero.
pub fn max_exponent_difference(fmt: FloatFormat) -> u32 {
    fmt.mantissa_width()
}

/// Whether an exponent pair survives encoding with non-zero significands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EerRegion {
    Inside,
    Outside,
}

/// Classify a (real, imaginary) exponent pair against the effective
/// encoding region for a shared exponent `e_max`.
///
/// Both gaps must be at most one mantissa width for common encoding and at
/// most two for box encoding. Requires `e_re, e_im <= e_max`.
pub fn eer_classify(
    e_re: u32,
    e_im: u32,
    e_max: u32,
    fmt: FloatFormat,
    mode: BlockMode,
) -> EerRegion {
    assert!(e_re <= e_max && e_im <= e_max, "exponents exceed the block maximum");
    let limit = match mode {
        BlockMode::Common => fmt.mantissa_width(),
        BlockMode::Box => 2 * fmt.mantissa_width(),
    };
    if e_max - e_re <= limit && e_max - e_im <= limit {
        EerRegion::Inside
    } else {
        EerRegion::Outside
    }
}

/// MSB-first bit packer.
struct BitWriter {
    bytes: Vec<u8>,
    bit_pos: u32,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            bit_pos: 0,
        }
    }

    fn push(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value < 1u64 << width);
        for k in (0..width).rev() {
            if self.bit_pos % 8 == 0 {
                self.bytes.push(0);
            }
            let bit = (value >> k) & 1;
            let byte = self.bytes.last_mut().unwrap();
            *byte |= (bit as u8) << (7 - self.bit_pos % 8);
            self.bit_pos += 1;
        }
    }

    fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// MSB-first bit unpacker.
struct BitReader<'a> {
    bytes: &'a [u8],
    bit_pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, bit_pos: 0 }
    }

    fn pull(&mut self, width: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self
                .bytes
                .get(self.bit_pos / 8)
                .ok_or_else(|| Error::InvalidBlockFile("truncated payload".into()))?;
            let bit = (byte >> (7 - self.bit_pos % 8)) & 1;
            v = (v << 1) | bit as u64;
            self.bit_pos += 1;
        }
        Ok(v)
    }
}
