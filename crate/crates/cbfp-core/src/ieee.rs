//! Bit-exact decomposition and reassembly of scalar floating-point values.
//!
//! Scalars are carried as `f64` throughout the crate; the three supported
//! storage widths (16/32/64-bit) all embed exactly in `f64`, so a field
//! record round-trips without loss. Only normal numbers and exact zero are
//! accepted: NaN, infinities, and denormals have no block encoding and are
//! rejected at this boundary.

use crate::error::{Error, Result};

/// One of the three standard binary interchange widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FloatFormat {
    /// 16-bit: 5 exponent bits, 10 mantissa bits.
    Half,
    /// 32-bit: 8 exponent bits, 23 mantissa bits.
    Single,
    /// 64-bit: 11 exponent bits, 52 mantissa bits.
    Double,
}

impl FloatFormat {
    pub const ALL: [FloatFormat; 3] = [FloatFormat::Half, FloatFormat::Single, FloatFormat::Double];

    /// Total stored bits, sign included.
    pub const fn wordlength(self) -> u32 {
        match self {
            FloatFormat::Half => 16,
            FloatFormat::Single => 32,
            FloatFormat::Double => 64,
        }
    }

    pub const fn exponent_width(self) -> u32 {
        match self {
            FloatFormat::Half => 5,
            FloatFormat::Single => 8,
            FloatFormat::Double => 11,
        }
    }

    pub const fn mantissa_width(self) -> u32 {
        match self {
            FloatFormat::Half => 10,
            FloatFormat::Single => 23,
            FloatFormat::Double => 52,
        }
    }

    /// Exponent bias, 2^(exponent_width - 1) - 1.
    pub const fn bias(self) -> u32 {
        (1 << (self.exponent_width() - 1)) - 1
    }

    /// Largest biased exponent of a normal number, 2^exponent_width - 2.
    pub const fn max_biased_exponent(self) -> u32 {
        (1 << self.exponent_width()) - 2
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(FloatFormat::Half),
            "single" => Ok(FloatFormat::Single),
            "double" => Ok(FloatFormat::Double),
            other => Err(Error::InvalidArgument(format!(
                "unknown format '{other}' (expected half, single, or double)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FloatFormat::Half => "half",
            FloatFormat::Single => "single",
            FloatFormat::Double => "double",
        }
    }

    /// Round `x` toward zero onto this format's grid.
    ///
    /// Values below the normal range flush to exact zero; NaN, infinities,
    /// and magnitudes above the largest normal are rejected.
    pub fn truncate(self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        if !x.is_finite() {
            return Err(Error::UnsupportedValue(format!("{x} is not finite")));
        }
        let bits = x.to_bits();
        let exp64 = ((bits >> 52) & 0x7ff) as i64;
        if exp64 == 0 {
            // Subnormal in f64: below every supported normal range.
            return Ok(0.0);
        }
        let biased = exp64 - 1023 + self.bias() as i64;
        if biased > self.max_biased_exponent() as i64 {
            return Err(Error::UnsupportedValue(format!(
                "{x} overflows the {} range",
                self.name()
            )));
        }
        if biased < 1 {
            return Ok(0.0);
        }
        let drop = 52 - self.mantissa_width();
        let mask = if drop == 0 { 0 } else { (1u64 << drop) - 1 };
        Ok(f64::from_bits(bits & !mask))
    }
}

impl std::str::FromStr for FloatFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FloatFormat::parse(s)
    }
}

/// Decomposed sign / biased exponent / mantissa of one real scalar.
///
/// The all-zero record (exponent 0, mantissa 0) represents exact zero;
/// every other record is a normal number with an implied leading 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarFields {
    pub sign: bool,
    pub exponent: u32,
    pub mantissa: u64,
    pub format: FloatFormat,
}

impl ScalarFields {
    pub fn zero(format: FloatFormat) -> Self {
        ScalarFields {
            sign: false,
            exponent: 0,
            mantissa: 0,
            format,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.exponent == 0 && self.mantissa == 0
    }
}

/// Decompose a scalar into fields of `fmt`.
///
/// `x` must be exact zero or a value exactly representable as a normal
/// number in `fmt`; everything else is an `UnsupportedValue`.
pub fn split(x: f64, fmt: FloatFormat) -> Result<ScalarFields> {
    if x == 0.0 {
        return Ok(ScalarFields::zero(fmt));
    }
    if !x.is_finite() {
        return Err(Error::UnsupportedValue(format!("{x} is not finite")));
    }
    let bits = x.to_bits();
    let sign = bits >> 63 == 1;
    let exp64 = ((bits >> 52) & 0x7ff) as i64;
    let man64 = bits & ((1u64 << 52) - 1);
    if exp64 == 0 {
        return Err(Error::UnsupportedValue(format!("{x} is denormal")));
    }
    let biased = exp64 - 1023 + fmt.bias() as i64;
    if biased < 1 || biased > fmt.max_biased_exponent() as i64 {
        return Err(Error::UnsupportedValue(format!(
            "{x} is outside the {} normal range",
            fmt.name()
        )));
    }
    let drop = 52 - fmt.mantissa_width();
    let mask = if drop == 0 { 0 } else { (1u64 << drop) - 1 };
    if man64 & mask != 0 {
        return Err(Error::UnsupportedValue(format!(
            "{x} is not exactly representable in {}",
            fmt.name()
        )));
    }
    Ok(ScalarFields {
        sign,
        exponent: biased as u32,
        mantissa: man64 >> drop,
        format: fmt,
    })
}

/// Reassemble (-1)^sign * (1.mantissa) * 2^(exponent - bias).
///
/// The all-zero record returns 0.0. Field invariants are checked upstream;
/// debug builds assert them here.
pub fn assemble(f: &ScalarFields) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    debug_assert!(f.exponent >= 1 && f.exponent <= f.format.max_biased_exponent());
    debug_assert!(f.mantissa < 1u64 << f.format.mantissa_width());
    let unbiased = f.exponent as i64 - f.format.bias() as i64;
    let bits = ((f.sign as u64) << 63)
        | (((unbiased + 1023) as u64) << 52)
        | (f.mantissa << (52 - f.format.mantissa_width()));
    f64::from_bits(bits)
}
