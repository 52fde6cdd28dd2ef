//! Command-line experiment runner.
//!
//! Subcommands render CSV artifacts; `--out` writes the file atomically,
//! otherwise the CSV goes to stdout.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cbfp_core::alu::AluOp;
use cbfp_core::cli::{
    cmd_alu_evm, cmd_complexity, cmd_qam, cmd_rates, cmd_rrc_range, cmd_wordlength, default_seed,
    write_atomic, SweepSpec,
};
use cbfp_core::codec::Encoding;
use cbfp_core::error::{Error, Result};
use cbfp_core::ieee::FloatFormat;
use cbfp_core::qam::TransceiverConfig;

const USAGE: &str = "\
usage: cbfp <command> [flags]

commands:
  alu-evm      --op {add|mul|conv} [--format F] [--ratio S] [--block-size N] [--seed U] [--out P]
  qam          [--config P] [--snr S] [--out P]
  complexity   --op {add|mul|conv} --mode {ieee754|common|box} --sizes LIST
               [--trials N] [--seed U] [--out P]
  rrc-range    [--alpha S] [--filter-order N] [--upsample L] [--out P]
  wordlength   --block-size LIST [--format F] [--out P]
  rates        [--config P] [--mode M] [--out P]

sweeps S are start:stop:step; LIST is comma-separated (conv sizes accept N1xN2);
formats are half|single|double; the default seed derives from the block magic.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cbfp: {e}");
            match e {
                Error::InvalidArgument(_) => {
                    eprintln!("{USAGE}");
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(args: &[String]) -> Result<()> {
    let Some(command) = args.first() else {
        return Err(Error::InvalidArgument("missing command".into()));
    };
    if command == "--help" || command == "-h" || command == "help" {
        print!("{USAGE}");
        return Ok(());
    }
    let flags = parse_flags(&args[1..])?;
    let csv = match command.as_str() {
        "alu-evm" => {
            let op = AluOp::parse(flags.require("op")?)?;
            let fmt = FloatFormat::parse(flags.get("format").unwrap_or("single"))?;
            let sweep = SweepSpec::parse(flags.get("ratio").unwrap_or("0:200:5"))?;
            let block_size = flags.parse_usize("block-size", 64)?;
            let seed = flags.parse_u64("seed", default_seed())?;
            cmd_alu_evm(op, fmt, sweep, block_size, seed)?
        }
        "qam" => {
            let cfg = load_config(&flags)?;
            let sweep = SweepSpec::parse(flags.get("snr").unwrap_or("10:40:5"))?;
            cmd_qam(&cfg, sweep)?
        }
        "complexity" => {
            let op = AluOp::parse(flags.require("op")?)?;
            let encoding = Encoding::parse(flags.require("mode")?)?;
            let sizes = parse_sizes(flags.require("sizes")?)?;
            let trials = flags.parse_usize("trials", 100)?;
            let seed = flags.parse_u64("seed", default_seed())?;
            cmd_complexity(op, encoding, &sizes, trials, seed)?
        }
        "rrc-range" => {
            let sweep = SweepSpec::parse(flags.get("alpha").unwrap_or("0.05:0.5:0.05"))?;
            let order = flags.parse_usize("filter-order", 32)? as u32;
            let upsample = flags.parse_usize("upsample", 4)? as u32;
            cmd_rrc_range(sweep, order, upsample)?
        }
        "wordlength" => {
            let fmt = FloatFormat::parse(flags.get("format").unwrap_or("single"))?;
            let sizes: Vec<usize> = flags
                .require("block-size")?
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad block size '{s}'")))
                })
                .collect::<Result<_>>()?;
            cmd_wordlength(&sizes, fmt)?
        }
        "rates" => {
            let cfg = load_config(&flags)?;
            let encoding = match flags.get("mode") {
                Some(m) => Encoding::parse(m)?,
                None => cfg.mode,
            };
            cmd_rates(&cfg, encoding)?
        }
        other => {
            return Err(Error::InvalidArgument(format!("unknown command '{other}'")));
        }
    };
    match flags.get("out") {
        Some(path) => write_atomic(Path::new(path), &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn load_config(flags: &Flags) -> Result<TransceiverConfig> {
    match flags.get("config") {
        Some(path) => TransceiverConfig::from_file(&PathBuf::from(path)),
        None => Ok(TransceiverConfig::default()),
    }
}

/// Comma-separated sizes; each entry is N (square) or N1xN2.
fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let parse = |p: &str| {
                p.parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad size '{item}'")))
            };
            match item.split_once('x') {
                Some((a, b)) => Ok((parse(a)?, parse(b)?)),
                None => {
                    let n = parse(item)?;
                    Ok((n, n))
                }
            }
        })
        .collect()
}

struct Flags(HashMap<String, String>);

impl Flags {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::InvalidArgument(format!("missing --{key}")))
    }

    fn parse_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad --{key} '{v}'"))),
        }
    }

    fn parse_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad --{key} '{v}'"))),
        }
    }
}

fn parse_flags(args: &[String]) -> Result<Flags> {
    let mut map = HashMap::new();
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let Some(key) = arg.strip_prefix("--") else {
            return Err(Error::InvalidArgument(format!("unexpected argument '{arg}'")));
        };
        let value = args
            .get(i + 1)
            .ok_or_else(|| Error::InvalidArgument(format!("missing value for --{key}")))?;
        map.insert(key.to_string(), value.clone());
        i += 2;
    }
    Ok(Flags(map))
}
