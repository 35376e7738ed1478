//! `qrng` — simulate a phase-diffusion quantum random number generator
//! and carry its output through digitization, entropy analysis, hashing
//! extraction, and a statistical test battery.
//!
//! Exit codes: 0 success; 1 configuration or usage error (includes
//! computation errors from degenerate inputs); 2 I/O or file-format
//! error; 3 test-battery failure (`test` subcommand only, for CI use —
//! `pipeline` records its battery verdict in the artifacts instead).

use qrng::config::{parse_config_text, parse_count, ConfigError, PipelineConfig};
use qrng::files::{self, FileError, RecordKind};
use qrng::pipeline::{self, PipelineError, PipelineSummary};
use qrng_sim::mzi::estimate_visibility_from_records;
use qrng_sim::stattests::{run_battery, BatteryReport};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use thiserror::Error;

const USAGE: &str = "\
qrng — phase-diffusion quantum RNG simulator

USAGE: qrng <SUBCOMMAND> [ARGS] [FLAGS]

SUBCOMMANDS
  simulate                 simulate pulses, interfere, digitize; write
                           energy.bin, digitized.bin, histogram.csv
  noise-ref                capture a detector-noise reference; write noise.bin
  calibrate                fit the ADC range and noise floor; print the
                           calibrated parameters as config lines
  analyze RECORDS [B_MAX]  entropy curve + autocorrelation of a digitized
                           record file; write entropy_curve.csv,
                           correlation.csv
  extract RECORDS          pack low ADC bits and hash-extract; write
                           extracted.bits
  test BITSTREAM           run the statistical battery on a bitstream file;
                           write battery.csv (exit 3 on failure)
  pipeline                 all of the above in sequence; also write
                           report.txt

FLAGS
  --config PATH        configuration file (flat `section.key = value` lines)
  --seed N             override the master seed
  --pulses N           override the record count (accepts 1e6 style)
  --out DIR            override the output directory
  --bits-per-pulse N   low ADC bits packed per record (default 12)
  --alpha F            battery significance level (default 0.01)
  --noise PATH         noise-reference file for entropy subtraction (analyze)
  --raw                read/write bitstreams headerless
  --help               this text
";

/// Top-level command error; carries its process exit code.
#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Stage(#[from] PipelineError),
    #[error(
        "test-battery failure: {failures} of {applicable} applicable tests failed (alpha = {alpha})"
    )]
    BatteryFailed {
        failures: usize,
        applicable: usize,
        alpha: f64,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Config(_) | Self::Stage(_) => 1,
            Self::File(_) => 2,
            Self::BatteryFailed { .. } => 3,
        }
    }
}

/// Parsed command-line flags and positional arguments.
#[derive(Debug, Default, PartialEq)]
struct Options {
    config_path: Option<PathBuf>,
    seed: Option<u64>,
    pulses: Option<usize>,
    out: Option<PathBuf>,
    bits_per_pulse: u32,
    alpha: f64,
    noise: Option<PathBuf>,
    raw: bool,
    help: bool,
    positionals: Vec<String>,
}

fn parse_args(args: &[String]) -> Result<Options, CliError> {
    let mut opts = Options {
        bits_per_pulse: 12,
        alpha: 0.01,
        ..Options::default()
    };
    let mut iter = args.iter();
    let usage = |msg: String| CliError::Usage(msg);
    let value_of = |flag: &str, iter: &mut std::slice::Iter<String>| {
        iter.next()
            .cloned()
            .ok_or_else(|| usage(format!("flag {flag} requires a value")))
    };
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--config" => opts.config_path = Some(PathBuf::from(value_of("--config", &mut iter)?)),
            "--seed" => {
                let v = value_of("--seed", &mut iter)?;
                opts.seed =
                    Some(parse_count(&v).ok_or_else(|| usage(format!("bad --seed `{v}`")))?);
            }
            "--pulses" => {
                let v = value_of("--pulses", &mut iter)?;
                opts.pulses = Some(
                    parse_count(&v).ok_or_else(|| usage(format!("bad --pulses `{v}`")))? as usize,
                );
            }
            "--out" => opts.out = Some(PathBuf::from(value_of("--out", &mut iter)?)),
            "--bits-per-pulse" => {
                let v = value_of("--bits-per-pulse", &mut iter)?;
                opts.bits_per_pulse = v
                    .parse()
                    .map_err(|_| usage(format!("bad --bits-per-pulse `{v}`")))?;
            }
            "--alpha" => {
                let v = value_of("--alpha", &mut iter)?;
                opts.alpha = v.parse().map_err(|_| usage(format!("bad --alpha `{v}`")))?;
            }
            "--noise" => opts.noise = Some(PathBuf::from(value_of("--noise", &mut iter)?)),
            "--raw" => opts.raw = true,
            "--help" | "-h" => opts.help = true,
            other if other.starts_with('-') => {
                return Err(usage(format!("unknown flag `{other}`")));
            }
            positional => opts.positionals.push(positional.to_string()),
        }
    }
    Ok(opts)
}

/// Load the configuration: file (if given) under defaults, then flag
/// overrides, then validation.
fn load_config(opts: &Options) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &opts.config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::File(FileError::Io {
                    path: path.display().to_string(),
                    source: e,
                })
            })?;
            parse_config_text(&text)?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(pulses) = opts.pulses {
        cfg.n_pulses = pulses;
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::File(FileError::Io {
            path: dir.display().to_string(),
            source: e,
        })
    })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(args: &[String]) -> Result<(), CliError> {
    let Some(subcommand) = args.first() else {
        print!("{USAGE}");
        return Ok(());
    };
    let opts = parse_args(&args[1..])?;
    if opts.help {
        print!("{USAGE}");
        return Ok(());
    }
    match subcommand.as_str() {
        "simulate" => cmd_simulate(&opts),
        "noise-ref" => cmd_noise_ref(&opts),
        "calibrate" => cmd_calibrate(&opts),
        "analyze" => cmd_analyze(&opts),
        "extract" => cmd_extract(&opts),
        "test" => cmd_test(&opts),
        "pipeline" => cmd_pipeline(&opts),
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!(
            "unknown subcommand `{other}` (see --help)"
        ))),
    }
}

fn cmd_simulate(opts: &Options) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    ensure_out_dir(&cfg.output_dir)?;
    let hash = cfg.config_hash();
    let t0 = Instant::now();
    let records = pipeline::simulate_records(&cfg)?;
    let batch = pipeline::digitize(&cfg, &records)?;
    let elapsed = t0.elapsed().as_secs_f64();

    files::write_energy_records(&cfg.output_dir.join("energy.bin"), &records, hash)?;
    files::write_digitized_records(
        &cfg.output_dir.join("digitized.bin"),
        &batch.records,
        RecordKind::Digitized,
        hash,
    )?;
    let codes = batch.codes();
    files::write_histogram_csv(
        &cfg.output_dir.join("histogram.csv"),
        &codes,
        cfg.detector.adc_bits,
        hash,
    )?;

    let mean_energy = records.iter().map(|r| r.u_out).sum::<f64>() / records.len() as f64;
    println!(
        "simulated {} records in {elapsed:.2} s ({:.3e} pulses/s)",
        records.len(),
        records.len() as f64 / elapsed
    );
    println!("mean pulse energy: {mean_energy:.6e} photons");
    if let Ok(v) = estimate_visibility_from_records(&records) {
        println!("visibility estimate: {v:.6}");
    }
    println!(
        "saturated records: {} | rail-touching records: {}",
        batch.saturated_count, batch.rail_count
    );
    println!(
        "wrote energy.bin, digitized.bin, histogram.csv to {}",
        cfg.output_dir.display()
    );
    Ok(())
}

fn cmd_noise_ref(opts: &Options) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    ensure_out_dir(&cfg.output_dir)?;
    let t0 = Instant::now();
    let batch = pipeline::noise_reference(&cfg, cfg.n_pulses)?;
    let elapsed = t0.elapsed().as_secs_f64();
    files::write_digitized_records(
        &cfg.output_dir.join("noise.bin"),
        &batch.records,
        RecordKind::NoiseReference,
        cfg.config_hash(),
    )?;
    let codes = batch.codes();
    let b = cfg.detector.adc_bits;
    let entropy = qrng_sim::entropy::code_entropy(&codes, b, b).map_err(PipelineError::from)?;
    println!(
        "captured {} noise records in {elapsed:.2} s",
        batch.records.len()
    );
    println!("noise entropy at b={b}: {entropy:.4} bits");
    println!("wrote noise.bin to {}", cfg.output_dir.display());
    Ok(())
}

fn cmd_calibrate(opts: &Options) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    let target = 0.7;
    let t0 = Instant::now();
    let records = pipeline::simulate_records(&cfg)?;
    let outcome = pipeline::calibrate(&cfg, &records, target)?;
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "calibrated on {} records in {elapsed:.2} s (target noise entropy {target} bits)",
        records.len()
    );
    println!("achieved noise entropy: {:.6} bits", outcome.noise_entropy);
    println!("half-range: {:.9e} detector units", outcome.half_range);
    println!("calibrated configuration lines (paste into a config file):");
    println!("detector.adc_min = {:?}", outcome.params.adc_range.0);
    println!("detector.adc_max = {:?}", outcome.params.adc_range.1);
    println!("detector.noise_sigma = {:?}", outcome.params.noise_sigma);
    Ok(())
}

fn cmd_analyze(opts: &Options) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    let [records_path, rest @ ..] = opts.positionals.as_slice() else {
        return Err(CliError::Usage(
            "analyze needs a records file: qrng analyze RECORDS [B_MAX]".into(),
        ));
    };
    let b_max = match rest {
        [] => cfg.detector.adc_bits,
        [b] => b
            .parse()
            .map_err(|_| CliError::Usage(format!("bad B_MAX `{b}`")))?,
        _ => return Err(CliError::Usage("analyze takes at most two arguments".into())),
    };
    ensure_out_dir(&cfg.output_dir)?;
    let (records, header) =
        files::read_digitized_records(Path::new(records_path), RecordKind::Digitized)?;
    let signal: Vec<u32> = records.iter().map(|r| r.code).collect();
    let noise_codes = match &opts.noise {
        Some(path) => Some(
            files::read_digitized_records(path, RecordKind::NoiseReference)?
                .0
                .iter()
                .map(|r| r.code)
                .collect::<Vec<u32>>(),
        ),
        None => None,
    };
    let analysis =
        pipeline::analyze_codes(&signal, noise_codes.as_deref(), b_max, cfg.detector.adc_bits)?;
    files::write_entropy_curve_csv(
        &cfg.output_dir.join("entropy_curve.csv"),
        &analysis.curve,
        header.config_hash,
    )?;
    files::write_correlation_csv(
        &cfg.output_dir.join("correlation.csv"),
        &analysis.correlation.r,
        header.config_hash,
    )?;
    let last = analysis.curve.last().expect("b_max >= 1");
    println!(
        "entropy at b={}: total {:.4} bits, noise {:.4} bits, quantum {:.4} bits, \
         min-entropy {:.4} bits",
        last.b, last.total_entropy, last.noise_entropy, last.quantum_entropy, last.min_entropy
    );
    println!(
        "max |autocorrelation| over lags 1..={}: {:.6e}",
        analysis.correlation_lags, analysis.max_abs_correlation
    );
    println!(
        "wrote entropy_curve.csv, correlation.csv to {}",
        cfg.output_dir.display()
    );
    Ok(())
}

fn cmd_extract(opts: &Options) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    let [records_path] = opts.positionals.as_slice() else {
        return Err(CliError::Usage(
            "extract needs a records file: qrng extract RECORDS".into(),
        ));
    };
    ensure_out_dir(&cfg.output_dir)?;
    let (records, _) =
        files::read_digitized_records(Path::new(records_path), RecordKind::Digitized)?;
    let codes: Vec<u32> = records.iter().map(|r| r.code).collect();
    let t0 = Instant::now();
    let raw = pipeline::codes_to_raw_bits(&codes, opts.bits_per_pulse, cfg.detector.adc_bits)?;
    let outcome = pipeline::extract_stream(&raw, &cfg)?;
    let elapsed = t0.elapsed().as_secs_f64();
    let out_path = cfg.output_dir.join("extracted.bits");
    files::write_bitstream(&out_path, &outcome.stream, opts.raw)?;
    println!(
        "extracted {} bits from {} raw bits in {elapsed:.2} s ({:.3e} bits/s)",
        outcome.stream.bit_len(),
        raw.bit_len(),
        outcome.stream.bit_len() as f64 / elapsed
    );
    println!(
        "{} blocks, {} raw bits discarded at the tail, reduction factor {:.4}",
        outcome.blocks,
        outcome.discarded_bits,
        cfg.extractor.reduction_factor()
    );
    println!("wrote extracted.bits to {}", cfg.output_dir.display());
    Ok(())
}

fn battery_verdict(report: &BatteryReport) -> Result<(), CliError> {
    let failures = report.failures();
    if failures > 0 {
        return Err(CliError::BatteryFailed {
            failures,
            applicable: report.results.iter().filter(|r| r.applicable_test()).count(),
            alpha: report.alpha,
        });
    }
    Ok(())
}

fn print_battery(report: &BatteryReport) {
    println!(
        "battery over {} bits (alpha = {}):",
        report.n_bits, report.alpha
    );
    for r in &report.results {
        println!(
            "  {:<24} statistic {:>12.6} p {:>10.6} {:?}",
            r.name, r.statistic, r.p_value, r.status
        );
    }
    println!(
        "expected false failures under the null: {:.2}",
        report.expected_false_failures()
    );
}

fn cmd_test(opts: &Options) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    let [bits_path] = opts.positionals.as_slice() else {
        return Err(CliError::Usage(
            "test needs a bitstream file: qrng test BITSTREAM".into(),
        ));
    };
    ensure_out_dir(&cfg.output_dir)?;
    let stream = files::read_bitstream(Path::new(bits_path), opts.raw)?;
    let report = run_battery(&stream, opts.alpha);
    files::write_battery_csv(
        &cfg.output_dir.join("battery.csv"),
        &report,
        cfg.config_hash(),
    )?;
    print_battery(&report);
    battery_verdict(&report)
}

fn cmd_pipeline(opts: &Options) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    ensure_out_dir(&cfg.output_dir)?;
    let hash = cfg.config_hash();
    let dir = &cfg.output_dir;
    let b = cfg.detector.adc_bits;

    let t0 = Instant::now();
    let records = pipeline::simulate_records(&cfg)?;
    let t_sim = t0.elapsed().as_secs_f64();
    let batch = pipeline::digitize(&cfg, &records)?;
    let noise = pipeline::noise_reference(&cfg, cfg.n_pulses)?;
    let t_digitize = t0.elapsed().as_secs_f64() - t_sim;

    files::write_energy_records(&dir.join("energy.bin"), &records, hash)?;
    files::write_digitized_records(
        &dir.join("digitized.bin"),
        &batch.records,
        RecordKind::Digitized,
        hash,
    )?;
    files::write_digitized_records(
        &dir.join("noise.bin"),
        &noise.records,
        RecordKind::NoiseReference,
        hash,
    )?;

    let codes = batch.codes();
    let noise_codes = noise.codes();
    files::write_histogram_csv(&dir.join("histogram.csv"), &codes, b, hash)?;
    let analysis = pipeline::analyze_codes(&codes, Some(&noise_codes), b, b)?;
    files::write_entropy_curve_csv(&dir.join("entropy_curve.csv"), &analysis.curve, hash)?;
    files::write_correlation_csv(&dir.join("correlation.csv"), &analysis.correlation.r, hash)?;

    let raw = pipeline::codes_to_raw_bits(&codes, opts.bits_per_pulse, b)?;
    let extraction = pipeline::extract_stream(&raw, &cfg)?;
    files::write_bitstream(&dir.join("extracted.bits"), &extraction.stream, opts.raw)?;
    let battery = run_battery(&extraction.stream, opts.alpha);
    files::write_battery_csv(&dir.join("battery.csv"), &battery, hash)?;
    let elapsed = t0.elapsed().as_secs_f64();

    let mut distinct = codes.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let summary = PipelineSummary {
        config_hash: hash,
        seed: cfg.seed,
        n_records: codes.len(),
        mean_energy: records.iter().map(|r| r.u_out).sum::<f64>() / records.len() as f64,
        visibility: estimate_visibility_from_records(&records).map_err(PipelineError::from)?,
        baseline: batch.baseline,
        saturated: batch.saturated_count,
        rail: batch.rail_count,
        distinct_codes: distinct.len(),
        bits_per_record: opts.bits_per_pulse,
        entropy_full: *analysis.curve.last().expect("b >= 1"),
        max_abs_correlation: analysis.max_abs_correlation,
        correlation_lags: analysis.correlation_lags,
        raw_bits: raw.bit_len(),
        extracted_bits: extraction.stream.bit_len(),
        blocks: extraction.blocks,
        discarded_bits: extraction.discarded_bits,
        reduction: cfg.extractor.reduction_factor(),
        battery,
        rates: pipeline::rate_figures(
            cfg.laser().prf,
            opts.bits_per_pulse,
            cfg.extractor.reduction_factor(),
        ),
    };
    files::write_report_txt(&dir.join("report.txt"), &pipeline::report_text(&summary), hash)?;

    println!(
        "pipeline: {} records in {elapsed:.2} s ({:.3e} pulses/s; simulate {t_sim:.2} s, \
         digitize {t_digitize:.2} s)",
        codes.len(),
        codes.len() as f64 / elapsed
    );
    println!(
        "entropy at b={b}: total {:.4} bits, quantum {:.4} bits | max |r| {:.3e} | \
         extracted {} bits",
        summary.entropy_full.total_entropy,
        summary.entropy_full.quantum_entropy,
        summary.max_abs_correlation,
        summary.extracted_bits
    );
    println!(
        "battery: {}/{} applicable tests passed",
        summary
            .battery
            .results
            .iter()
            .filter(|r| r.passed() && r.applicable_test())
            .count(),
        summary
            .battery
            .results
            .iter()
            .filter(|r| r.applicable_test())
            .count()
    );
    println!("artifacts and report.txt in {}", dir.display());
    Ok(())
}
