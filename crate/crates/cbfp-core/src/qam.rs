//! Discrete-time complex baseband QAM transmitter/receiver chains and the
//! per-stage memory/compute rate model.
//!
//! The chain runs mapper -> upsample -> pulse shape -> AWGN -> matched
//! filter -> downsample -> demapper. Pulse shaping in the block encodings
//! goes through [`block_conv`] over fixed-size segments (overlap-save with
//! the raw input history carried in scalar form); the plain encoding runs
//! the per-scalar path. A run always produces the received symbols plus
//! their EVM against a reference chain executed in plain per-scalar
//! arithmetic with a bit-identical noise sequence.

use num_complex::Complex64;

use crate::alu::{block_conv, ieee_block_conv, OpCostCounters};
use crate::codec::{CbfpBlock, Encoding};
use crate::error::{Error, Result};
use crate::ieee::FloatFormat;
use crate::metrics::{evm_percent, EvmResult};
use crate::rng::{derive_seed, Rng};

/// Default seed for experiment drivers ("CBFP" byte string).
pub const DEFAULT_SEED: u64 = 0x4342_4650;

/// Symbols dropped from each end of the EVM accounting window to cover the
/// two filters' edge transients.
const EVM_GUARD_SYMBOLS: usize = 8;

const BITS_STREAM: u64 = 0x10;
const NOISE_STREAM: u64 = 0x20;

/// Chain parameters. Defaults give the 1024-QAM single-carrier setup:
/// 4x oversampling, 2400 Hz symbol rate, order-32 root-raised-cosine with
/// 0.2 roll-off, and one block per upsampled symbol-rate second.
#[derive(Debug, Clone, PartialEq)]
pub struct TransceiverConfig {
    pub constellation_order: u32,
    pub upsample: u32,
    pub symbol_rate: u32,
    pub filter_order: u32,
    pub rolloff: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub block_size: usize,
    pub format: FloatFormat,
    pub mode: Encoding,
    pub n_symbols: usize,
}

impl Default for TransceiverConfig {
    fn default() -> Self {
        TransceiverConfig {
            constellation_order: 1024,
            upsample: 4,
            symbol_rate: 2400,
            filter_order: 32,
            rolloff: 0.2,
            snr_db: f64::INFINITY,
            seed: DEFAULT_SEED,
            block_size: 4 * 2400,
            format: FloatFormat::Single,
            mode: Encoding::Ieee754,
            n_symbols: 10_000,
        }
    }
}

impl TransceiverConfig {
    pub fn bits_per_symbol(&self) -> u32 {
        self.constellation_order.trailing_zeros()
    }

    pub fn validate(&self) -> Result<()> {
        if self.constellation_order != 1024 {
            return Err(Error::InvalidArgument(format!(
                "constellation_order must be 1024, got {}",
                self.constellation_order
            )));
        }
        if self.upsample == 0 {
            return Err(Error::InvalidArgument("upsample must be >= 1".into()));
        }
        if self.symbol_rate == 0 {
            return Err(Error::InvalidArgument("symbol_rate must be >= 1".into()));
        }
        if self.filter_order == 0 || self.filter_order % 2 != 0 {
            return Err(Error::InvalidRolloff(self.rolloff));
        }
        if !(self.rolloff > 0.0 && self.rolloff < 1.0) {
            return Err(Error::InvalidRolloff(self.rolloff));
        }
        if self.block_size == 0 {
            return Err(Error::InvalidArgument("block_size must be >= 1".into()));
        }
        if self.n_symbols <= 2 * EVM_GUARD_SYMBOLS {
            return Err(Error::InvalidArgument(format!(
                "n_symbols must exceed {}",
                2 * EVM_GUARD_SYMBOLS
            )));
        }
        Ok(())
    }

    /// Parse `key=value` lines; `#` starts a comment, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TransceiverConfig::default();
        let mut block_size_set = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::InvalidConfig {
                line: line_no,
                message: format!("expected key=value, got '{line}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| Error::InvalidConfig {
                line: line_no,
                message,
            };
            match key {
                "constellation_order" => {
                    cfg.constellation_order = value
                        .parse()
                        .map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "upsample" => {
                    cfg.upsample = value
                        .parse()
                        .map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "symbol_rate" => {
                    cfg.symbol_rate = value
                        .parse()
                        .map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "filter_order" => {
                    cfg.filter_order = value
                        .parse()
                        .map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "rolloff" => {
                    cfg.rolloff = value
                        .parse()
                        .map_err(|_| bad(format!("bad number '{value}'")))?
                }
                "snr_db" => {
                    cfg.snr_db = parse_snr(value).map_err(|_| bad(format!("bad snr '{value}'")))?
                }
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "block_size" => {
                    cfg.block_size = value
                        .parse()
                        .map_err(|_| bad(format!("bad integer '{value}'")))?;
                    block_size_set = true;
                }
                "format" => {
                    cfg.format = FloatFormat::parse(value)
                        .map_err(|e| bad(e.to_string()))?
                }
                "mode" => {
                    cfg.mode = Encoding::parse(value).map_err(|e| bad(e.to_string()))?
                }
                "n_symbols" => {
                    cfg.n_symbols = value
                        .parse()
                        .map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                other => {
                    return Err(bad(format!("unknown key '{other}'")));
                }
            }
        }
        if !block_size_set {
            cfg.block_size = cfg.upsample as usize * cfg.symbol_rate as usize;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

/// Parse an SNR value, accepting `inf` for the noiseless sentinel.
pub fn parse_snr(s: &str) -> Result<f64> {
    match s {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        other => other
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad snr '{other}'"))),
    }
}

fn gray_encode(k: u32) -> u32 {
    k ^ (k >> 1)
}

fn gray_decode(v: u32) -> u32 {
    let mut k = v;
    let mut shift = 1;
    while shift < 32 {
        k ^= k >> shift;
        shift <<= 1;
    }
    k
}

/// Per-axis amplitude scale making the constellation's mean energy one.
fn constellation_scale(m: u32) -> f64 {
    let levels = 1u32 << (m.trailing_zeros() / 2);
    let mean_energy = 2.0 * ((levels as f64).powi(2) - 1.0) / 3.0;
    1.0 / mean_energy.sqrt()
}

/// Map a bit stream onto the square Gray-coded constellation, scaled to
/// unit mean symbol energy. Bit count must divide by log2(M).
pub fn map_symbols(bits: &[u8], m: u32) -> Result<Vec<Complex64>> {
    let j = m.trailing_zeros();
    if !m.is_power_of_two() || j == 0 || j % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "constellation order {m} is not a square power of two"
        )));
    }
    if bits.len() % j as usize != 0 {
        return Err(Error::BitCountNotMultipleOfJ {
            bits: bits.len(),
            j,
        });
    }
    let half = j / 2;
    let levels = 1u32 << half;
    let scale = constellation_scale(m);
    let mut out = Vec::with_capacity(bits.len() / j as usize);
    for chunk in bits.chunks(j as usize) {
        let to_axis = |bits: &[u8]| -> f64 {
            let v = bits.iter().fold(0u32, |acc, &b| (acc << 1) | (b & 1) as u32);
            let k = gray_decode(v);
            scale * (2.0 * k as f64 - (levels as f64 - 1.0))
        };
        let re = to_axis(&chunk[..half as usize]);
        let im = to_axis(&chunk[half as usize..]);
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

/// Nearest-level demapper inverting [`map_symbols`].
pub fn demap_symbols(symbols: &[Complex64], m: u32) -> Result<Vec<u8>> {
    let j = m.trailing_zeros();
    if !m.is_power_of_two() || j == 0 || j % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "constellation order {m} is not a square power of two"
        )));
    }
    let half = j / 2;
    let levels = 1u32 << half;
    let scale = constellation_scale(m);
    let mut bits = Vec::with_capacity(symbols.len() * j as usize);
    for s in symbols {
        let mut push_axis = |y: f64| {
            let k = ((y / scale + (levels as f64 - 1.0)) / 2.0).round();
            let k = (k.max(0.0) as u32).min(levels - 1);
            let v = gray_encode(k);
            for b in (0..half).rev() {
                bits.push(((v >> b) & 1) as u8);
            }
        };
        push_axis(s.re);
        push_axis(s.im);
    }
    Ok(bits)
}

/// Insert `l - 1` zeros after every sample.
pub fn upsample(x: &[Complex64], l: u32) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(x.len() * l as usize);
    for &v in x {
        out.push(v);
        for _ in 1..l {
            out.push(Complex64::new(0.0, 0.0));
        }
    }
    out
}

/// Take every `l`-th sample starting at `offset`.
pub fn downsample(x: &[Complex64], l: u32, offset: usize) -> Result<Vec<Complex64>> {
    if offset >= x.len() {
        return Err(Error::OffsetOutOfRange {
            offset,
            len: x.len(),
        });
    }
    Ok(x.iter().skip(offset).step_by(l as usize).copied().collect())
}

/// Root-raised-cosine impulse response: `n + 1` taps at `l` samples per
/// symbol, even-symmetric, normalized to unit energy. The removable
/// singularities at t = 0 and |t| = 1/(4a) take their analytic limits.
pub fn rrc_taps(alpha: f64, n: u32, l: u32) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) || n % 2 != 0 || n == 0 || l == 0 {
        return Err(Error::InvalidRolloff(alpha));
    }
    use std::f64::consts::PI;
    let len = n as usize + 1;
    let mut taps = Vec::with_capacity(len);
    for k in 0..len {
        let t = (k as f64 - n as f64 / 2.0) / l as f64;
        let h = if t.abs() < 1e-12 {
            1.0 + alpha * (4.0 / PI - 1.0)
        } else if (t.abs() - 1.0 / (4.0 * alpha)).abs() < 1e-9 {
            (alpha / 2f64.sqrt())
                * ((1.0 + 2.0 / PI) * (PI / (4.0 * alpha)).sin()
                    + (1.0 - 2.0 / PI) * (PI / (4.0 * alpha)).cos())
        } else {
            let num = (PI * t * (1.0 - alpha)).sin()
                + 4.0 * alpha * t * (PI * t * (1.0 + alpha)).cos();
            let den = PI * t * (1.0 - (4.0 * alpha * t).powi(2));
            num / den
        };
        taps.push(h);
    }
    let energy: f64 = taps.iter().map(|h| h * h).sum();
    let norm = energy.sqrt();
    for h in &mut taps {
        *h /= norm;
    }
    // Tap positions where the numerator vanishes analytically leave a
    // sub-epsilon residue; snap those to exact zero so the impulse
    // response's dynamic range reflects the filter, not rounding noise.
    let peak = taps.iter().fold(0.0f64, |m, h| m.max(h.abs()));
    for h in &mut taps {
        if h.abs() < peak * 1e-12 {
            *h = 0.0;
        }
    }
    Ok(taps)
}

fn gaussian_noise(len: usize, sigma2: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = Rng::new(seed);
    let s = (sigma2 / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let (g1, g2) = rng.next_gaussian_pair();
            Complex64::new(s * g1, s * g2)
        })
        .collect()
}

fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Add circularly-symmetric Gaussian noise at the requested SNR, measured
/// against the input's mean power. `snr_db = +inf` returns the input
/// unchanged; identical seeds produce identical noise.
pub fn awgn(x: &[Complex64], snr_db: f64, seed: u64) -> Vec<Complex64> {
    if x.is_empty() || snr_db.is_infinite() {
        return x.to_vec();
    }
    let sigma2 = mean_power(x) / 10f64.powf(snr_db / 10.0);
    let noise = gaussian_noise(x.len(), sigma2, seed);
    x.iter().zip(noise).map(|(v, n)| v + n).collect()
}

/// One segment's convolution sizes and measured counters.
#[derive(Debug, Clone)]
pub struct FilterAudit {
    pub n1: usize,
    pub n2: usize,
    pub counters: OpCostCounters,
}

fn truncate_signal(x: &[Complex64], fmt: FloatFormat) -> Result<Vec<Complex64>> {
    x.iter()
        .map(|v| Ok(Complex64::new(fmt.truncate(v.re)?, fmt.truncate(v.im)?)))
        .collect()
}

/// Full-length FIR filtering of `x` by real `taps` under one encoding.
///
/// Block encodings segment the input into `block_size`-sample chunks and
/// convolve each against the tap block, carrying the last `taps-1` input
/// samples between chunks in scalar form. Output length is
/// `x.len() + taps.len() - 1` in every mode.
pub fn filter_signal(
    x: &[Complex64],
    taps: &[f64],
    block_size: usize,
    fmt: FloatFormat,
    encoding: Encoding,
) -> Result<(Vec<Complex64>, Vec<FilterAudit>)> {
    let taps_c: Vec<Complex64> = taps.iter().map(|&h| Complex64::new(h, 0.0)).collect();
    let mut counters = OpCostCounters::new();
    match encoding.block_mode() {
        None => {
            let out = ieee_block_conv(&taps_c, x, fmt, &mut counters)?;
            Ok((out, Vec::new()))
        }
        Some(mode) => {
            let t = taps_c.len();
            let taps_block = CbfpBlock::encode(&taps_c, fmt, mode)?;
            let total_out = x.len() + t - 1;
            // Trailing zeros flush the filter tail through the last chunk.
            let mut extended = x.to_vec();
            extended.resize(total_out, Complex64::new(0.0, 0.0));

            let mut history = vec![Complex64::new(0.0, 0.0); t - 1];
            let mut out = Vec::with_capacity(total_out);
            let mut audits = Vec::new();
            let mut pos = 0;
            while pos < extended.len() {
                let end = (pos + block_size).min(extended.len());
                let seg = &extended[pos..end];
                let mut chunk = history.clone();
                chunk.extend_from_slice(seg);
                let chunk_block = CbfpBlock::encode(&chunk, fmt, mode)?;
                let conv = block_conv(&taps_block, &chunk_block, &mut counters)?;
                let decoded = conv.decode();
                out.extend_from_slice(&decoded[t - 1..t - 1 + seg.len()]);
                audits.push(FilterAudit {
                    n1: t,
                    n2: chunk.len(),
                    counters,
                });
                history.clear();
                history.extend_from_slice(&chunk[chunk.len() - (t - 1)..]);
                pos = end;
            }
            Ok((out, audits))
        }
    }
}

/// Outcome of one chain run.
#[derive(Debug, Clone)]
pub struct ChainResult {
    /// Received symbols after matched filtering and decimation.
    pub rx_symbols: Vec<Complex64>,
    /// EVM between this chain's symbols and the per-scalar reference run,
    /// over the guard-trimmed window.
    pub evm_vs_ieee: EvmResult,
    pub tx_bits: Vec<u8>,
    pub rx_bits: Vec<u8>,
    /// Per-segment convolution audits from both filters (block modes only).
    pub filter_audits: Vec<FilterAudit>,
}

/// Run the transmit and receive chains under `cfg.mode`, alongside a
/// reference run in plain per-scalar arithmetic with the same seed. The
/// noise sequence is derived from the reference signal power, so it is
/// bit-identical across modes.
pub fn run_chain(cfg: &TransceiverConfig) -> Result<ChainResult> {
    cfg.validate()?;
    let fmt = cfg.format;
    let j = cfg.bits_per_symbol();
    let mut bit_rng = Rng::new(derive_seed(cfg.seed, BITS_STREAM));
    let tx_bits: Vec<u8> = (0..cfg.n_symbols * j as usize)
        .map(|_| (bit_rng.next_u64() & 1) as u8)
        .collect();
    let symbols = truncate_signal(&map_symbols(&tx_bits, cfg.constellation_order)?, fmt)?;
    let taps: Vec<f64> = rrc_taps(cfg.rolloff, cfg.filter_order, cfg.upsample)?
        .into_iter()
        .map(|h| fmt.truncate(h))
        .collect::<Result<_>>()?;

    let up = upsample(&symbols, cfg.upsample);
    let (ref_tx, _) = filter_signal(&up, &taps, cfg.block_size, fmt, Encoding::Ieee754)?;

    let noise = if cfg.snr_db.is_finite() {
        let sigma2 = mean_power(&ref_tx) / 10f64.powf(cfg.snr_db / 10.0);
        Some(gaussian_noise(
            ref_tx.len(),
            sigma2,
            derive_seed(cfg.seed, NOISE_STREAM),
        ))
    } else {
        None
    };

    // Both filters are symmetric (order/2 samples each), so sampling starts
    // one filter order into the matched filter output.
    let delay = cfg.filter_order as usize;
    let receive = |tx: &[Complex64],
                   encoding: Encoding,
                   audits: &mut Vec<FilterAudit>|
     -> Result<Vec<Complex64>> {
        let rx_in = match &noise {
            Some(n) => truncate_signal(
                &tx.iter().zip(n).map(|(v, w)| v + w).collect::<Vec<_>>(),
                fmt,
            )?,
            None => tx.to_vec(),
        };
        let (mf, a) = filter_signal(&rx_in, &taps, cfg.block_size, fmt, encoding)?;
        audits.extend(a);
        let mut symbols = downsample(&mf, cfg.upsample, delay)?;
        symbols.truncate(cfg.n_symbols);
        Ok(symbols)
    };

    let mut ref_audits = Vec::new();
    let ref_rx = receive(&ref_tx, Encoding::Ieee754, &mut ref_audits)?;

    let mut filter_audits = Vec::new();
    let mode_rx = match cfg.mode {
        Encoding::Ieee754 => ref_rx.clone(),
        encoding => {
            let (mode_tx, tx_audits) =
                filter_signal(&up, &taps, cfg.block_size, fmt, encoding)?;
            filter_audits.extend(tx_audits);
            receive(&mode_tx, encoding, &mut filter_audits)?
        }
    };

    let window = EVM_GUARD_SYMBOLS..cfg.n_symbols - EVM_GUARD_SYMBOLS;
    let evm_vs_ieee = evm_percent(&ref_rx[window.clone()], &mode_rx[window])?;
    let rx_bits = demap_symbols(&mode_rx, cfg.constellation_order)?;
    Ok(ChainResult {
        rx_symbols: mode_rx,
        evm_vs_ieee,
        tx_bits,
        rx_bits,
        filter_audits,
    })
}

/// One stage of the rate report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRate {
    pub stage: &'static str,
    pub read_bps: u64,
    pub write_bps: u64,
    pub macs_per_s: u64,
}

/// Per-stage memory input/output and multiply-accumulate rates.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub stages: Vec<StageRate>,
    pub notes: Vec<&'static str>,
}

/// Evaluate the six-stage rate table for a configuration under one sample
/// encoding. Component payload width is the wordlength plus lead (and box)
/// bits minus the shared exponent for the block encodings, or the plain
/// wordlength otherwise; rates are exact integers.
pub fn rate_model(cfg: &TransceiverConfig, encoding: Encoding) -> RateReport {
    let f = cfg.symbol_rate as u64;
    let l = cfg.upsample as u64;
    let j = cfg.bits_per_symbol() as u64;
    let n_g = cfg.filter_order as u64;
    let n_w = cfg.format.wordlength() as u64;
    let n_e = cfg.format.exponent_width() as u64;
    // Lead and box bits per real component, shared exponent per block.
    let (n_l, n_b, shared) = match encoding {
        Encoding::Ieee754 => (0u64, 0u64, 0u64),
        Encoding::Common => (1, 0, n_e),
        Encoding::Box => (1, 1, n_e),
    };
    // Full payload per component; the downsampler and demapper read
    // streams carry the lead bit but not the box bit.
    let comp = n_w + n_l + n_b - shared_sub(n_e, encoding);
    let comp_no_box = n_w + n_l - shared_sub(n_e, encoding);

    let mapper_write = 2 * f * comp + shared;
    let upsampler_write = 2 * l * f * comp + shared;
    let filter_read = (3 * l * n_g + 1) * (l * f) * comp + 2 * shared;
    let filter_macs = l * l * n_g * f;

    let stages = vec![
        StageRate {
            stage: "symbol_mapper",
            read_bps: j * f,
            write_bps: mapper_write,
            macs_per_s: 0,
        },
        StageRate {
            stage: "upsampler",
            read_bps: mapper_write,
            write_bps: upsampler_write,
            macs_per_s: 0,
        },
        StageRate {
            stage: "pulse_shape_filter",
            read_bps: filter_read,
            write_bps: upsampler_write,
            macs_per_s: filter_macs,
        },
        StageRate {
            stage: "matched_filter",
            read_bps: filter_read,
            write_bps: upsampler_write,
            macs_per_s: filter_macs,
        },
        StageRate {
            stage: "downsampler",
            read_bps: 2 * l * f * comp_no_box + shared + (n_w + n_l + n_b),
            write_bps: mapper_write,
            macs_per_s: 0,
        },
        StageRate {
            stage: "symbol_demapper",
            read_bps: 2 * f * comp_no_box + shared + (j / 2) * (n_w + n_l),
            write_bps: j * f,
            macs_per_s: 0,
        },
    ];
    let mut notes = Vec::new();
    if encoding == Encoding::Box {
        notes.push(
            "downsampler and demapper read rates use the component width without \
             the box bit; the box bit reappears only in the downsampler's trailing term",
        );
    }
    RateReport { stages, notes }
}

/// Shared-exponent reduction applied to the per-component width.
fn shared_sub(n_e: u64, encoding: Encoding) -> u64 {
    match encoding {
        Encoding::Ieee754 => 0,
        _ => n_e,
    }
}
