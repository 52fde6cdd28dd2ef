//! End-to-end runs of the `cbfp` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn cbfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbfp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(tag);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn wordlength_to_stdout() {
    let out = cbfp(&["wordlength", "--block-size", "1,25,9600", "--format", "single"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("25,single,1600,1258,1308"));
    assert!(text.contains("9600,single,614400,480008,499208"));
}

#[test]
fn rates_default_config() {
    let out = cbfp(&["rates", "--mode", "box"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("symbol_mapper,24000,124808,0"));
    assert!(text.contains("matched_filter,96096016,499208,1228800"));
}

#[test]
fn alu_evm_writes_expected_row_count() {
    let dir = tmp_dir("alu-evm");
    let path = dir.join("mul.csv");
    let out = cbfp(&[
        "alu-evm",
        "--op",
        "mul",
        "--ratio",
        "0:200:5",
        "--block-size",
        "16",
        "--seed",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let data_rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("ratio_db"))
        .count();
    assert_eq!(data_rows, 41);

    // Byte-identical re-run.
    let path2 = dir.join("mul2.csv");
    let out = cbfp(&[
        "alu-evm",
        "--op",
        "mul",
        "--ratio",
        "0:200:5",
        "--block-size",
        "16",
        "--seed",
        "5",
        "--out",
        path2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(text, std::fs::read_to_string(&path2).unwrap());
}

#[test]
fn complexity_measured_within_predictions() {
    let out = cbfp(&[
        "complexity",
        "--op",
        "conv",
        "--mode",
        "box",
        "--sizes",
        "1,3x5,8",
        "--trials",
        "10",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().filter(|l| l.starts_with("conv,")) {
        let cols: Vec<&str> = line.split(',').collect();
        let pred_mant: u64 = cols[4].parse().unwrap();
        let meas_mant: u64 = cols[5].parse().unwrap();
        let pred_exp: u64 = cols[6].parse().unwrap();
        let meas_exp: u64 = cols[7].parse().unwrap();
        assert!(meas_mant <= pred_mant, "{line}");
        assert!(meas_exp <= pred_exp, "{line}");
    }
    assert!(text.contains("conv,box,3,5,214,"));
}

#[test]
fn qam_sweep_with_config_file() {
    let dir = tmp_dir("qam");
    let config = dir.join("chain.cfg");
    std::fs::write(
        &config,
        "# small run\nn_symbols = 48\nblock_size = 64\nseed = 11\n",
    )
    .unwrap();
    let path = dir.join("qam.csv");
    let out = cbfp(&[
        "qam",
        "--config",
        config.to_str().unwrap(),
        "--snr",
        "20:30:10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("snr_db"))
        .collect();
    // 2 sweep points x 3 modes.
    assert_eq!(rows.len(), 6);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let evm: f64 = cols[2].parse().unwrap();
        match cols[1] {
            "ieee754" => assert_eq!(evm, 0.0),
            _ => assert!(evm < 0.1, "{row}"),
        }
    }
    // The metadata header records the shared seed.
    assert!(text.lines().next().unwrap().contains("seed=11"));
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tmp_dir("qam-bad");
    let config = dir.join("bad.cfg");
    std::fs::write(&config, "seed = 1\nrolloff = nope\n").unwrap();
    let out = cbfp(&["qam", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn invalid_flags_exit_nonzero_without_partial_files() {
    let dir = tmp_dir("bad-flags");
    let path = dir.join("never.csv");
    let out = cbfp(&["alu-evm", "--op", "bogus", "--out", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(2));
    assert!(!path.exists());
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown op"));
}

#[test]
fn rrc_range_sweep() {
    let out = cbfp(&["rrc-range", "--alpha", "0.05:0.5:0.05"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("alpha"))
        .count();
    assert_eq!(rows, 10);
}
