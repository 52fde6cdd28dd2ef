//! Block arithmetic against an independent scalar oracle.
//!
//! The oracle below re-implements truncating scalar arithmetic directly on
//! integer fields pulled from the f64 bit pattern. It shares no code with
//! the library, so agreement here checks the block pipeline end to end:
//! operand unpacking, wide accumulation, renormalization, and re-encoding.

use cbfp_core::alu::{block_add, block_conv, block_mul, OpCostCounters};
use cbfp_core::codec::{BlockMode, CbfpBlock, Encoding};
use cbfp_core::ieee::FloatFormat;
use cbfp_core::rng::Rng;
use num_complex::Complex64;

/// Truncating scalar arithmetic on explicit (sign, significand, exponent)
/// triples. Round-toward-zero everywhere, subnormals flushed to zero.
mod exact {
    /// (negative, significand with implied bit, unbiased exponent of the
    /// significand's least significant bit). Zero is (false, 0, 0).
    #[derive(Clone, Copy, Debug)]
    pub struct Fields {
        pub neg: bool,
        pub sig: u64,
        pub lsb_exp: i64,
    }

    pub fn decompose(x: f64) -> Fields {
        if x == 0.0 {
            return Fields {
                neg: false,
                sig: 0,
                lsb_exp: 0,
            };
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        assert!(exp != 0 && exp != 0x7ff, "oracle domain is normal numbers");
        Fields {
            neg: bits >> 63 == 1,
            sig: (1u64 << 52) | (bits & ((1u64 << 52) - 1)),
            lsb_exp: exp - 1023 - 52,
        }
    }

    /// Truncate a signed integer times power of two into a format value.
    pub fn pack(neg: bool, mag: u128, lsb_exp: i64, mantissa_width: u32, emax_unbiased: i64) -> f64 {
        if mag == 0 {
            return 0.0;
        }
        let msb = 127 - mag.leading_zeros() as i64;
        let width = mantissa_width as i64 + 1;
        let (sig, exp) = if msb >= width {
            ((mag >> (msb - width + 1)) as u64, lsb_exp + msb - width + 1)
        } else {
            ((mag as u64) << (width - 1 - msb), lsb_exp - (width - 1 - msb))
        };
        let value_exp = exp + width - 1; // exponent of the leading bit
        if value_exp > emax_unbiased {
            panic!("oracle overflow");
        }
        if value_exp < -(1 << 10) {
            return 0.0;
        }
        let x = sig as f64 * (2.0f64).powi(exp as i32);
        if neg {
            -x
        } else {
            x
        }
    }

    /// Flush values whose exponent underflows the format's normal range.
    fn flush(x: f64, exponent_width: u32) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let bias = (1i64 << (exponent_width - 1)) - 1;
        let exp = ((x.to_bits() >> 52) & 0x7ff) as i64 - 1023;
        if exp + bias < 1 {
            0.0
        } else {
            x
        }
    }

    pub fn add(x: f64, y: f64, mantissa_width: u32, exponent_width: u32) -> f64 {
        let (a, b) = (decompose(x), decompose(y));
        if a.sig == 0 {
            return y;
        }
        if b.sig == 0 {
            return x;
        }
        let lsb = a.lsb_exp.min(b.lsb_exp);
        let align = |f: Fields| -> i128 {
            let shifted = (f.sig as u128) << (f.lsb_exp - lsb);
            if f.neg {
                -(shifted as i128)
            } else {
                shifted as i128
            }
        };
        let sum = align(a) + align(b);
        flush(
            pack(
                sum < 0,
                sum.unsigned_abs(),
                lsb,
                mantissa_width,
                (1 << (exponent_width - 1)) as i64,
            ),
            exponent_width,
        )
    }

    pub fn mul(x: f64, y: f64, mantissa_width: u32, exponent_width: u32) -> f64 {
        let (a, b) = (decompose(x), decompose(y));
        if a.sig == 0 || b.sig == 0 {
            return 0.0;
        }
        let mag = a.sig as u128 * b.sig as u128;
        flush(
            pack(
                a.neg != b.neg,
                mag,
                a.lsb_exp + b.lsb_exp,
                mantissa_width,
                (1 << (exponent_width - 1)) as i64,
            ),
            exponent_width,
        )
    }
}

fn exact_add(x: f64, y: f64, fmt: FloatFormat) -> f64 {
    exact::add(x, y, fmt.mantissa_width(), fmt.exponent_width())
}

fn exact_mul(x: f64, y: f64, fmt: FloatFormat) -> f64 {
    exact::mul(x, y, fmt.mantissa_width(), fmt.exponent_width())
}

fn exact_complex_mul(a: Complex64, b: Complex64, fmt: FloatFormat) -> Complex64 {
    let p1 = exact_mul(a.re, b.re, fmt);
    let p2 = exact_mul(a.im, b.im, fmt);
    let p3 = exact_mul(a.re, b.im, fmt);
    let p4 = exact_mul(a.im, b.re, fmt);
    Complex64::new(exact_add(p1, -p2, fmt), exact_add(p3, p4, fmt))
}

/// Build a value with the given biased exponent and mantissa in `fmt`.
fn value(sign: bool, exponent: u32, mantissa: u64, fmt: FloatFormat) -> f64 {
    cbfp_core::ieee::assemble(&cbfp_core::ieee::ScalarFields {
        sign,
        exponent,
        mantissa,
        format: fmt,
    })
}

#[test]
fn add_same_sign_flat_blocks_is_bit_exact() {
    // Equal exponents and one shared sign: every sum lands one exponent up,
    // so block storage quantizes exactly like the scalar format does.
    let mut rng = Rng::new(0xADD);
    for fmt in FloatFormat::ALL {
        let e = fmt.max_biased_exponent() / 2;
        let mask = (1u64 << fmt.mantissa_width()) - 1;
        for mode in [BlockMode::Common, BlockMode::Box] {
            for _ in 0..50 {
                let sign = rng.next_bool();
                let n = rng.next_range_i64(1, 12) as usize;
                let mut make = || -> Vec<Complex64> {
                    (0..n)
                        .map(|_| {
                            Complex64::new(
                                value(sign, e, rng.next_u64() & mask, fmt),
                                value(sign, e, rng.next_u64() & mask, fmt),
                            )
                        })
                        .collect()
                };
                let a = make();
                let b = make();
                let block_a = CbfpBlock::encode(&a, fmt, mode).unwrap();
                let block_b = CbfpBlock::encode(&b, fmt, mode).unwrap();
                let mut counters = OpCostCounters::new();
                let got = block_add(&block_a, &block_b, &mut counters).unwrap().decode();
                for k in 0..n {
                    let want_re = exact_add(a[k].re, b[k].re, fmt);
                    let want_im = exact_add(a[k].im, b[k].im, fmt);
                    assert_eq!(got[k].re.to_bits(), want_re.to_bits(), "{fmt:?} {mode:?}");
                    assert_eq!(got[k].im.to_bits(), want_im.to_bits(), "{fmt:?} {mode:?}");
                }
            }
        }
    }
}

#[test]
fn mul_real_flat_blocks_is_bit_exact() {
    // Real-only operands with significands in [1, 1.25): all products share
    // one exponent, so the single product truncation is the only loss and
    // it is identical in both paths.
    let mut rng = Rng::new(0x3121);
    for fmt in FloatFormat::ALL {
        let e = fmt.max_biased_exponent() / 2;
        let mask = (1u64 << (fmt.mantissa_width() - 2)) - 1;
        for mode in [BlockMode::Common, BlockMode::Box] {
            for _ in 0..50 {
                let n = rng.next_range_i64(1, 12) as usize;
                let mut make = || -> Vec<Complex64> {
                    (0..n)
                        .map(|_| {
                            Complex64::new(
                                value(rng.next_bool(), e, rng.next_u64() & mask, fmt),
                                0.0,
                            )
                        })
                        .collect()
                };
                let a = make();
                let b = make();
                let block_a = CbfpBlock::encode(&a, fmt, mode).unwrap();
                let block_b = CbfpBlock::encode(&b, fmt, mode).unwrap();
                let mut counters = OpCostCounters::new();
                let got = block_mul(&block_a, &block_b, &mut counters).unwrap().decode();
                for k in 0..n {
                    let want = exact_mul(a[k].re, b[k].re, fmt);
                    assert_eq!(got[k].re.to_bits(), want.to_bits(), "{fmt:?} {mode:?}");
                    assert_eq!(got[k].im, 0.0);
                }
            }
        }
    }
}

#[test]
fn mul_zero_tail_complex_blocks_is_bit_exact() {
    // Mantissa tails zeroed deep enough that no product or combine step
    // ever truncates a one bit, in either path.
    let mut rng = Rng::new(0xBEEF);
    for fmt in FloatFormat::ALL {
        let e = fmt.max_biased_exponent() / 2;
        let b_m = fmt.mantissa_width();
        let keep = (b_m - 4) / 2;
        for mode in [BlockMode::Common, BlockMode::Box] {
            for _ in 0..50 {
                let n = rng.next_range_i64(1, 10) as usize;
                let mut make = || -> Vec<Complex64> {
                    (0..n)
                        .map(|_| {
                            let comp = |rng: &mut Rng| {
                                let m = (rng.next_u64() & ((1u64 << keep) - 1)) << (b_m - keep);
                                value(rng.next_bool(), e, m, fmt)
                            };
                            Complex64::new(comp(&mut rng), comp(&mut rng))
                        })
                        .collect()
                };
                let a = make();
                let b = make();
                let block_a = CbfpBlock::encode(&a, fmt, mode).unwrap();
                let block_b = CbfpBlock::encode(&b, fmt, mode).unwrap();
                let mut counters = OpCostCounters::new();
                let got = block_mul(&block_a, &block_b, &mut counters).unwrap().decode();
                for k in 0..n {
                    let want = exact_complex_mul(a[k], b[k], fmt);
                    assert_eq!(got[k].re.to_bits(), want.re.to_bits(), "{fmt:?} {mode:?}");
                    assert_eq!(got[k].im.to_bits(), want.im.to_bits(), "{fmt:?} {mode:?}");
                }
            }
        }
    }
}

#[test]
fn conv_scaling_is_bit_exact() {
    // Length-1 filter: convolution reduces to one product per output.
    let mut rng = Rng::new(0xC0);
    for fmt in FloatFormat::ALL {
        let e = fmt.max_biased_exponent() / 2;
        let mask = (1u64 << (fmt.mantissa_width() - 2)) - 1;
        for mode in [BlockMode::Common, BlockMode::Box] {
            let n = 9usize;
            let mut make = |count: usize| -> Vec<Complex64> {
                (0..count)
                    .map(|_| Complex64::new(value(rng.next_bool(), e, rng.next_u64() & mask, fmt), 0.0))
                    .collect()
            };
            let a = make(1);
            let b = make(n);
            let block_a = CbfpBlock::encode(&a, fmt, mode).unwrap();
            let block_b = CbfpBlock::encode(&b, fmt, mode).unwrap();
            let mut counters = OpCostCounters::new();
            let got = block_conv(&block_a, &block_b, &mut counters).unwrap().decode();
            assert_eq!(got.len(), n);
            for k in 0..n {
                let want = exact_mul(a[0].re, b[k].re, fmt);
                assert_eq!(got[k].re.to_bits(), want.to_bits(), "{fmt:?} {mode:?}");
            }
        }
    }
}

#[test]
fn conv_accumulation_zero_tail_is_bit_exact() {
    // Same-sign real operands with short significands: every product and
    // every partial sum stays within the format's significand, so the
    // scalar step-by-step path and the wide accumulator agree exactly.
    let mut rng = Rng::new(0xACC);
    for fmt in FloatFormat::ALL {
        let e = fmt.max_biased_exponent() / 2;
        let b_m = fmt.mantissa_width();
        let keep = (b_m - 6) / 2;
        for mode in [BlockMode::Common, BlockMode::Box] {
            for (n1, n2) in [(2usize, 5usize), (3, 8)] {
                let mut make = |count: usize| -> Vec<Complex64> {
                    (0..count)
                        .map(|_| {
                            let m = (rng.next_u64() & ((1u64 << keep) - 1)) << (b_m - keep);
                            Complex64::new(value(false, e, m, fmt), 0.0)
                        })
                        .collect()
                };
                let a = make(n1);
                let b = make(n2);
                let block_a = CbfpBlock::encode(&a, fmt, mode).unwrap();
                let block_b = CbfpBlock::encode(&b, fmt, mode).unwrap();
                let mut counters = OpCostCounters::new();
                let got = block_conv(&block_a, &block_b, &mut counters).unwrap().decode();
                // Scalar oracle: direct convolution with truncation after
                // every product and accumulation.
                for out_idx in 0..n1 + n2 - 1 {
                    let lo = out_idx.saturating_sub(n2 - 1);
                    let hi = out_idx.min(n1 - 1);
                    let mut acc = 0.0f64;
                    for i in lo..=hi {
                        let p = exact_mul(a[i].re, b[out_idx - i].re, fmt);
                        acc = exact_add(acc, p, fmt);
                    }
                    assert_eq!(
                        got[out_idx].re.to_bits(),
                        acc.to_bits(),
                        "{fmt:?} {mode:?} ({n1},{n2}) output {out_idx}"
                    );
                }
            }
        }
    }
}

#[test]
fn add_error_within_one_stored_unit() {
    // General blocks: the decoded sum differs from the truncating scalar
    // sum of the decoded operands by at most one unit of the output's
    // stored scale.
    let mut rng = Rng::new(77);
    let fmt = FloatFormat::Single;
    for mode in [BlockMode::Common, BlockMode::Box] {
        for trial in 0..200 {
            let n = 4 + trial % 5;
            let spread = (trial % 20) as i64;
            let mask = (1u64 << fmt.mantissa_width()) - 1;
            let mut make = || -> Vec<Complex64> {
                (0..n)
                    .map(|_| {
                        let comp = |rng: &mut Rng| {
                            value(
                                rng.next_bool(),
                                (130 - rng.next_range_i64(0, spread)) as u32,
                                rng.next_u64() & mask,
                                fmt,
                            )
                        };
                        Complex64::new(comp(&mut rng), comp(&mut rng))
                    })
                    .collect()
            };
            let a = make();
            let b = make();
            let block_a = CbfpBlock::encode(&a, fmt, mode).unwrap();
            let block_b = CbfpBlock::encode(&b, fmt, mode).unwrap();
            let da = block_a.decode();
            let db = block_b.decode();
            let mut counters = OpCostCounters::new();
            let out = block_add(&block_a, &block_b, &mut counters).unwrap();
            let got = out.decode();
            let e_out = out.common_exponent() as i64;
            for k in 0..n {
                for (idx, (g, want)) in [
                    (got[k].re, exact_add(da[k].re, db[k].re, fmt)),
                    (got[k].im, exact_add(da[k].im, db[k].im, fmt)),
                ]
                .into_iter()
                .enumerate()
                {
                    let comp = 2 * k + idx;
                    let scale = e_out
                        - fmt.bias() as i64
                        - fmt.mantissa_width() as i64
                        - fmt.mantissa_width() as i64 * out.box_shift(comp) as i64;
                    let unit = (2.0f64).powi(scale as i32);
                    assert!(
                        (g - want).abs() <= unit,
                        "{mode:?} trial {trial} comp {comp}: |{g} - {want}| > {unit}"
                    );
                }
            }
        }
    }
}

#[test]
fn mul_error_within_two_stored_units() {
    let mut rng = Rng::new(78);
    let fmt = FloatFormat::Single;
    for mode in [BlockMode::Common, BlockMode::Box] {
        for trial in 0..200 {
            let n = 4 + trial % 5;
            let spread = (trial % 12) as i64;
            let mask = (1u64 << fmt.mantissa_width()) - 1;
            let mut make = || -> Vec<Complex64> {
                (0..n)
                    .map(|_| {
                        let comp = |rng: &mut Rng| {
                            value(
                                rng.next_bool(),
                                (130 - rng.next_range_i64(0, spread)) as u32,
                                rng.next_u64() & mask,
                                fmt,
                            )
                        };
                        Complex64::new(comp(&mut rng), comp(&mut rng))
                    })
                    .collect()
            };
            let a = make();
            let b = make();
            let block_a = CbfpBlock::encode(&a, fmt, mode).unwrap();
            let block_b = CbfpBlock::encode(&b, fmt, mode).unwrap();
            let da = block_a.decode();
            let db = block_b.decode();
            let mut counters = OpCostCounters::new();
            let out = block_mul(&block_a, &block_b, &mut counters).unwrap();
            let got = out.decode();
            let e_out = out.common_exponent() as i64;
            for k in 0..n {
                let want = exact_complex_mul(da[k], db[k], fmt);
                for (idx, (g, w)) in [(got[k].re, want.re), (got[k].im, want.im)]
                    .into_iter()
                    .enumerate()
                {
                    let comp = 2 * k + idx;
                    let scale = e_out
                        - fmt.bias() as i64
                        - fmt.mantissa_width() as i64
                        - fmt.mantissa_width() as i64 * out.box_shift(comp) as i64;
                    let unit = (2.0f64).powi(scale as i32);
                    assert!(
                        (g - w).abs() <= 2.0 * unit,
                        "{mode:?} trial {trial} comp {comp}: |{g} - {w}| > {}",
                        2.0 * unit
                    );
                }
            }
        }
    }
}

#[test]
fn conv_matches_full_precision_oracle_at_low_spread() {
    // Exponents within 3 of the block maximum: against an untruncated f64
    // direct convolution the block result stays below 1e-3 percent EVM.
    use cbfp_core::metrics::evm_percent;
    let fmt = FloatFormat::Single;
    let mut rng = Rng::new(0x11EA);
    for mode in [BlockMode::Common, BlockMode::Box] {
        for trial in 0..20 {
            let mask = (1u64 << fmt.mantissa_width()) - 1;
            let mut make = |count: usize| -> Vec<Complex64> {
                (0..count)
                    .map(|_| {
                        let mut comp = |rng: &mut Rng| {
                            value(
                                rng.next_bool(),
                                (130 - rng.next_range_i64(0, 3)) as u32,
                                rng.next_u64() & mask,
                                fmt,
                            )
                        };
                        Complex64::new(comp(&mut rng), comp(&mut rng))
                    })
                    .collect()
            };
            let a = make(4);
            let b = make(16);
            let mut direct = vec![Complex64::new(0.0, 0.0); 19];
            for i in 0..4 {
                for j in 0..16 {
                    direct[i + j] += a[i] * b[j];
                }
            }
            let block_a = CbfpBlock::encode(&a, fmt, mode).unwrap();
            let block_b = CbfpBlock::encode(&b, fmt, mode).unwrap();
            let mut counters = OpCostCounters::new();
            let got = block_conv(&block_a, &block_b, &mut counters).unwrap().decode();
            let evm = evm_percent(&direct, &got).unwrap().evm_percent;
            assert!(evm < 1e-3, "{mode:?} trial {trial}: EVM {evm}");
        }
    }
}

#[test]
fn box_result_never_worse_than_common() {
    // Op-level dominance against the truncating scalar reference, across
    // the whole ratio range.
    use cbfp_core::cli::block_op_evm;
    use cbfp_core::metrics::generate_ratio_blocks;
    let fmt = FloatFormat::Single;
    for op in [
        cbfp_core::alu::AluOp::Add,
        cbfp_core::alu::AluOp::Mul,
        cbfp_core::alu::AluOp::Conv,
    ] {
        for step in 0..9u64 {
            let ratio = step as f64 * 20.0;
            let (a, b) = generate_ratio_blocks(ratio, 16, fmt, 0x0D0 + step).unwrap();
            let evm_common = block_op_evm(op, &a, &b, fmt, Encoding::Common).unwrap();
            let evm_box = block_op_evm(op, &a, &b, fmt, Encoding::Box).unwrap();
            assert!(
                evm_box <= evm_common,
                "{op:?} at {ratio} dB: box {evm_box} > common {evm_common}"
            );
        }
    }
}

#[test]
fn mixed_mode_add_promotes_to_box() {
    let fmt = FloatFormat::Single;
    let a = CbfpBlock::encode(
        &[Complex64::new(1.5, -2.0)],
        fmt,
        BlockMode::Common,
    )
    .unwrap();
    let b = CbfpBlock::encode(&[Complex64::new(0.25, 1.0)], fmt, BlockMode::Box).unwrap();
    let mut counters = OpCostCounters::new();
    let out = block_add(&a, &b, &mut counters).unwrap();
    assert_eq!(out.mode(), BlockMode::Box);
    assert_eq!(out.decode(), vec![Complex64::new(1.75, -1.0)]);
}
