//! Complex block floating-point toolkit.
//!
//! A block of complex samples shares one exponent field; per-component
//! sign, lead, optional box-shift, and mantissa fields complete the
//! representation. The crate provides:
//!
//! * bit-exact scalar field decomposition for the three standard widths
//!   ([`ieee`]),
//! * common-exponent and exponent-box block codecs with a serialized block
//!   format ([`codec`]),
//! * block add/multiply/convolve with cost counters audited against a
//!   worst-case complexity model ([`alu`]),
//! * EVM and dynamic-range measurement plus experiment generators
//!   ([`metrics`]),
//! * a 1024-QAM baseband transceiver case study with a per-stage
//!   memory/MAC rate model ([`qam`]),
//! * CSV experiment drivers behind the `cbfp` binary ([`cli`]).

pub mod alu;
pub mod cli;
pub mod codec;
pub mod error;
pub mod ieee;
pub mod metrics;
pub mod qam;
pub mod rng;

pub use alu::{
    block_add, block_conv, block_mul, ieee_block_add, ieee_block_conv, ieee_block_mul,
    predicted_costs, AluOp, OpCostCounters, WideAccumulator,
};
pub use codec::{
    eer_classify, max_exponent_difference, wordlength_bits, BlockMode, CbfpBlock, EerRegion,
    Encoding,
};
pub use error::{Error, Result};
pub use ieee::{assemble, split, FloatFormat, ScalarFields};
pub use metrics::{dynamic_range_db, evm_percent, generate_ratio_blocks, EvmResult};
pub use qam::{
    awgn, demap_symbols, downsample, map_symbols, rate_model, rrc_taps, run_chain, upsample,
    ChainResult, RateReport, StageRate, TransceiverConfig,
};
