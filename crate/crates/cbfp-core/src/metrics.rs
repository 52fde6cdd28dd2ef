//! Signal-quality measurement and the inputs-ratio experiment generator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ieee::{assemble, FloatFormat, ScalarFields};
use crate::rng::{derive_seed, Rng};

/// RMS error-vector magnitude in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvmResult {
    pub evm_percent: f64,
    pub n_samples: usize,
}

/// `||X - X̂||_2 / ||X||_2 * 100` over equal-length complex sequences.
pub fn evm_percent(reference: &[Complex64], test: &[Complex64]) -> Result<EvmResult> {
    if reference.len() != test.len() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: test.len(),
        });
    }
    if reference.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 0 });
    }
    let ref_energy: f64 = reference.iter().map(|x| x.norm_sqr()).sum();
    if ref_energy == 0.0 {
        return Err(Error::ZeroReference);
    }
    let err_energy: f64 = reference
        .iter()
        .zip(test)
        .map(|(r, t)| (r - t).norm_sqr())
        .sum();
    Ok(EvmResult {
        evm_percent: (err_energy / ref_energy).sqrt() * 100.0,
        n_samples: reference.len(),
    })
}

/// Ratio of the largest to the smallest non-zero magnitude, in dB.
pub fn dynamic_range_db(magnitudes: &[f64]) -> Result<f64> {
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    for &m in magnitudes {
        let m = m.abs();
        if m > 0.0 {
            max = max.max(m);
            min = min.min(m);
        }
    }
    if max == 0.0 {
        return Err(Error::AllZero);
    }
    Ok(20.0 * (max / min).log10())
}

/// Dynamic range of a complex sequence's moduli.
pub fn dynamic_range_db_complex(x: &[Complex64]) -> Result<f64> {
    let mags: Vec<f64> = x.iter().map(|v| v.norm()).collect();
    dynamic_range_db(&mags)
}

/// One exponent step in dB, 20*log10(2).
pub const DB_PER_EXPONENT_STEP: f64 = 6.020599913279624;

/// Deterministic operand pair for the inputs-ratio sweeps.
///
/// Component significands are uniform in [1, 2) with random signs; biased
/// exponents are uniform over `[e_top - delta, e_top]` with
/// `delta = round(ratio_db / (20 log10 2))` and `e_top = 130`. The first
/// two components of each block pin the range endpoints, so the realized
/// within-block dynamic range tracks the request to within one step.
pub fn generate_ratio_blocks(
    ratio_db: f64,
    n_samples: usize,
    fmt: FloatFormat,
    seed: u64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if !(ratio_db >= 0.0) {
        return Err(Error::RatioOutOfRange(ratio_db));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument(
            "ratio blocks need at least 2 samples".into(),
        ));
    }
    let e_top: i64 = 130;
    let delta = (ratio_db / DB_PER_EXPONENT_STEP).round() as i64;
    if e_top - delta < 1 {
        return Err(Error::RatioOutOfRange(ratio_db));
    }
    debug_assert!(e_top <= fmt.max_biased_exponent() as i64);
    let make_block = |stream: u64| -> Vec<Complex64> {
        let mut rng = Rng::new(derive_seed(seed, stream));
        let mask = (1u64 << fmt.mantissa_width()) - 1;
        let component = |idx: usize, rng: &mut Rng| {
            // The first two components anchor the range with unit
            // significands; interior draws stay strictly below the top
            // magnitude so the realized range is exactly delta steps.
            let (e, mantissa) = match idx {
                0 => (e_top, 0),
                1 => (e_top - delta, 0),
                _ => {
                    let hi = if delta >= 1 { e_top - 1 } else { e_top };
                    (
                        rng.next_range_i64(e_top - delta, hi),
                        rng.next_u64() & mask,
                    )
                }
            };
            assemble(&ScalarFields {
                sign: rng.next_bool(),
                exponent: e as u32,
                mantissa,
                format: fmt,
            })
        };
        (0..n_samples)
            .map(|k| {
                let re = component(2 * k, &mut rng);
                let im = component(2 * k + 1, &mut rng);
                Complex64::new(re, im)
            })
            .collect()
    };
    Ok((make_block(0), make_block(1)))
}
