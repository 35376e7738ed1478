//! End-to-end tests of the `qrng` binary: artifact determinism, the
//! file-format refusals, exit-code classes, and the extraction length
//! contract, all driven through the real executable.

use qrng::files::{write_digitized_records, RecordKind, BITS_MAGIC};
use qrng_sim::detection::DigitizedRecord;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qrng() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qrng"))
}

fn run(args: &[&str]) -> Output {
    qrng().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tmp(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qrng-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn pipeline_artifacts_are_byte_identical_across_runs() {
    let dir = tmp("determinism");
    let out = dir.to_str().unwrap();
    let first = run(&["pipeline", "--pulses", "2000", "--out", out]);
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    let snapshot = dir_bytes(&dir);
    assert_eq!(snapshot.len(), 9, "files: {:?}", snapshot.keys());

    let second = run(&["pipeline", "--pulses", "2000", "--out", out]);
    assert!(second.status.success());
    let again = dir_bytes(&dir);
    for (name, bytes) in &snapshot {
        assert_eq!(
            Some(bytes),
            again.get(name),
            "artifact {name} changed between identical runs"
        );
    }
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn changing_the_seed_changes_the_output() {
    let dir_a = tmp("seed-a");
    let dir_b = tmp("seed-b");
    let a = run(&[
        "pipeline",
        "--pulses",
        "2000",
        "--seed",
        "1",
        "--out",
        dir_a.to_str().unwrap(),
    ]);
    let b = run(&[
        "pipeline",
        "--pulses",
        "2000",
        "--seed",
        "2",
        "--out",
        dir_b.to_str().unwrap(),
    ]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(
        fs::read(dir_a.join("extracted.bits")).unwrap(),
        fs::read(dir_b.join("extracted.bits")).unwrap()
    );
    fs::remove_dir_all(dir_a).unwrap();
    fs::remove_dir_all(dir_b).unwrap();
}

#[test]
fn extract_honors_the_block_length_contract() {
    let dir = tmp("extract");
    let out = dir.to_str().unwrap();
    let sim = run(&["simulate", "--pulses", "2000", "--out", out]);
    assert!(sim.status.success(), "stderr: {}", stderr(&sim));

    let digitized = dir.join("digitized.bin");
    let ex = run(&["extract", digitized.to_str().unwrap(), "--out", out]);
    assert!(ex.status.success(), "stderr: {}", stderr(&ex));
    // 2000 records × 12 bits = 24000 raw bits → 43 whole 553-bit blocks
    // → 43 × 512 = 22016 output bits, 221 bits discarded.
    let text = stdout(&ex);
    assert!(text.contains("extracted 22016 bits from 24000 raw bits"), "{text}");
    assert!(text.contains("43 blocks, 221 raw bits discarded"), "{text}");
    assert!(text.contains("reduction factor 1.0801"), "{text}");

    let bytes = fs::read(dir.join("extracted.bits")).unwrap();
    assert_eq!(&bytes[..8], &BITS_MAGIC);
    let bit_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    assert_eq!(bit_len, 22016);
    assert_eq!(bytes.len(), 16 + 22016 / 8);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn raw_flag_writes_and_reads_headerless_bitstreams() {
    let dir = tmp("raw");
    let out = dir.to_str().unwrap();
    assert!(run(&["simulate", "--pulses", "2000", "--out", out])
        .status
        .success());
    let digitized = dir.join("digitized.bin");
    let ex = run(&["extract", digitized.to_str().unwrap(), "--out", out, "--raw"]);
    assert!(ex.status.success());
    let bytes = fs::read(dir.join("extracted.bits")).unwrap();
    assert_eq!(bytes.len(), 22016 / 8, "headerless: payload only");
    assert_ne!(&bytes[..8], &BITS_MAGIC);

    let test = run(&[
        "test",
        dir.join("extracted.bits").to_str().unwrap(),
        "--raw",
        "--out",
        out,
    ]);
    assert!(test.status.success(), "stderr: {}", stderr(&test));
    assert!(stdout(&test).contains("battery over 22016 bits"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_errors_exit_1_with_the_offending_key() {
    let dir = tmp("badconfig");
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "laser.prrf = 1e8\n").unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown configuration key `laser.prrf`"));

    let missing_value = run(&["simulate", "--seed"]);
    assert_eq!(missing_value.status.code(), Some(1));

    let unknown_sub = run(&["frobnicate"]);
    assert_eq!(unknown_sub.status.code(), Some(1));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn named_cross_checks_fire_at_load_time() {
    let dir = tmp("crosscheck");
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "mzi.t_loop = 1e-8\n").unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("loop-delay-mismatch"), "{}", stderr(&out));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn io_errors_exit_2() {
    let out = run(&["analyze", "/nonexistent/records.bin"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn battery_failure_exits_3() {
    let dir = tmp("zeros");
    let zeros = dir.join("zeros.raw");
    fs::write(&zeros, vec![0u8; 10_000]).unwrap();
    let out = run(&[
        "test",
        zeros.to_str().unwrap(),
        "--raw",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("test-battery failure"));
    // The battery table is still written for inspection.
    assert!(dir.join("battery.csv").exists());
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn version_mismatch_is_refused_with_exit_2() {
    let dir = tmp("version");
    let out = dir.to_str().unwrap();
    assert!(run(&["simulate", "--pulses", "50", "--out", out])
        .status
        .success());
    let path = dir.join("digitized.bin");
    let mut bytes = fs::read(&path).unwrap();
    bytes[8..10].copy_from_slice(&9u16.to_le_bytes());
    fs::write(&path, bytes).unwrap();

    let analyze = run(&["analyze", path.to_str().unwrap(), "--out", out]);
    assert_eq!(analyze.status.code(), Some(2));
    assert!(
        stderr(&analyze).contains("version 9 is not supported"),
        "{}",
        stderr(&analyze)
    );
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn analyze_rejects_a_single_record_file() {
    let dir = tmp("short");
    let path = dir.join("one.bin");
    let record = DigitizedRecord {
        code: 2048,
        saturated: false,
        raw_samples: None,
    };
    write_digitized_records(&path, &[record], RecordKind::Digitized, 0).unwrap();
    let out = run(&["analyze", path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("insufficient samples"), "{}", stderr(&out));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn analyze_with_noise_reference_writes_the_curve() {
    let dir = tmp("analyze");
    let out = dir.to_str().unwrap();
    assert!(run(&["simulate", "--pulses", "2000", "--out", out])
        .status
        .success());
    assert!(run(&["noise-ref", "--pulses", "2000", "--out", out])
        .status
        .success());
    let analyze = run(&[
        "analyze",
        dir.join("digitized.bin").to_str().unwrap(),
        "--noise",
        dir.join("noise.bin").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert!(analyze.status.success(), "stderr: {}", stderr(&analyze));
    let text = stdout(&analyze);
    assert!(text.contains("entropy at b=12"), "{text}");
    assert!(text.contains("quantum"), "{text}");

    let curve = fs::read_to_string(dir.join("entropy_curve.csv")).unwrap();
    // Preamble + column header + one row per b = 1..=12.
    assert_eq!(curve.lines().count(), 14);
    assert!(curve.contains("b,total,noise,quantum"));
    assert!(dir.join("correlation.csv").exists());
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn analyze_accepts_a_positional_bin_exponent() {
    let dir = tmp("bmax");
    let out = dir.to_str().unwrap();
    assert!(run(&["simulate", "--pulses", "500", "--out", out])
        .status
        .success());
    let analyze = run(&[
        "analyze",
        dir.join("digitized.bin").to_str().unwrap(),
        "8",
        "--out",
        out,
    ]);
    assert!(analyze.status.success());
    assert!(stdout(&analyze).contains("entropy at b=8"));
    let curve = fs::read_to_string(dir.join("entropy_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 10); // preamble + header + b = 1..=8
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn simulate_reports_the_physics_summary() {
    let dir = tmp("simulate");
    let out = run(&[
        "simulate",
        "--pulses",
        "2000",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("mean pulse energy"), "{text}");
    assert!(text.contains("visibility estimate"), "{text}");
    assert!(text.contains("saturated records"), "{text}");
    for artifact in ["energy.bin", "digitized.bin", "histogram.csv"] {
        assert!(dir.join(artifact).exists(), "missing {artifact}");
    }
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn calibrate_prints_paste_ready_config_lines() {
    let dir = tmp("calibrate");
    let out = run(&[
        "calibrate",
        "--pulses",
        "10000",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for key in [
        "detector.adc_min = ",
        "detector.adc_max = ",
        "detector.noise_sigma = ",
    ] {
        assert!(text.contains(key), "missing `{key}` in:\n{text}");
    }
    let achieved: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("achieved noise entropy: "))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((achieved - 0.7).abs() < 0.01, "achieved {achieved}");
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_is_printed_on_no_args_and_help() {
    let none = run(&[]);
    assert!(none.status.success());
    assert!(stdout(&none).contains("USAGE"));
    let help = run(&["--help"]);
    assert!(help.status.success());
    assert!(stdout(&help).contains("SUBCOMMANDS"));
}
