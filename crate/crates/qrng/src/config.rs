//! Pipeline configuration: defaults, a flat key–value file format, named
//! cross-module consistency checks, and a stable hash.
//!
//! The on-disk format is deliberately plain: one `section.key = value` per
//! line, `#` comments, no nesting. Unknown and duplicate keys are hard
//! errors — a silent typo in a physics parameter would invalidate a whole
//! run. A handful of derived parameters (loop delay, sampling grid, gain
//! dwell, envelope width) follow the pulse rate automatically unless set
//! explicitly.

use qrng_sim::detection::{samples_per_pulse, DetectorParams};
use qrng_sim::extractor::ExtractorConfig;
use qrng_sim::laser::GainCycleConfig;
use qrng_sim::model::LaserParams;
use qrng_sim::mzi::MziParams;
use std::collections::BTreeSet;
use std::path::PathBuf;
use thiserror::Error;

/// Errors from configuration parsing and validation.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    MalformedLine { line: usize, text: String },
    #[error("line {line}: unknown configuration key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate configuration key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: key `{key}`: cannot parse `{value}` as {wanted}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        wanted: &'static str,
    },
    #[error("constraint violated ({name}): {detail}")]
    Violation { name: &'static str, detail: String },
    #[error("invalid {section} parameters: {detail}")]
    ModuleRejected { section: &'static str, detail: String },
}

/// Everything one pipeline run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Gain-switching cycle, including the laser parameters it drives.
    pub cycle: GainCycleConfig,
    pub mzi: MziParams,
    pub detector: DetectorParams,
    pub extractor: ExtractorConfig,
    pub n_pulses: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            cycle: GainCycleConfig::default(),
            mzi: MziParams::default(),
            detector: DetectorParams::default(),
            extractor: ExtractorConfig::default(),
            n_pulses: 1_000_000,
            seed: 42,
            output_dir: PathBuf::from("qrng-out"),
        }
    }
}

impl PipelineConfig {
    /// The laser parameters (owned by the gain cycle).
    pub fn laser(&self) -> &LaserParams {
        &self.cycle.laser
    }

    /// Validate every module's parameters plus the cross-module
    /// constraints; the first violation is returned with a stable name.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.cycle.validate().map_err(|e| ConfigError::ModuleRejected {
            section: "laser/cycle",
            detail: e.to_string(),
        })?;
        self.mzi.validate().map_err(|e| ConfigError::ModuleRejected {
            section: "mzi",
            detail: e.to_string(),
        })?;
        self.detector
            .validate()
            .map_err(|e| ConfigError::ModuleRejected {
                section: "detector",
                detail: e.to_string(),
            })?;
        self.extractor
            .validate()
            .map_err(|e| ConfigError::ModuleRejected {
                section: "extractor",
                detail: e.to_string(),
            })?;

        let laser = self.laser();
        let period = 1.0 / laser.prf;
        if (self.mzi.t_loop - period).abs() > 1e-9 * period {
            return Err(ConfigError::Violation {
                name: "loop-delay-mismatch",
                detail: format!(
                    "mzi.t_loop = {:e} s must equal the pulse period 1/laser.prf = {period:e} s \
                     so each pulse interferes with its successor",
                    self.mzi.t_loop
                ),
            });
        }
        let expected_spp = samples_per_pulse(self.detector.sample_rate, laser.prf);
        if self.detector.samples_per_pulse != expected_spp {
            return Err(ConfigError::Violation {
                name: "sampling-grid-mismatch",
                detail: format!(
                    "detector.samples_per_pulse = {} but floor(sample_rate / prf) = {expected_spp}",
                    self.detector.samples_per_pulse
                ),
            });
        }
        if (self.detector.envelope_width - laser.pulse_width).abs() > 1e-12 * laser.pulse_width {
            return Err(ConfigError::Violation {
                name: "envelope-width-mismatch",
                detail: format!(
                    "detector.envelope_width = {:e} s must match laser.pulse_width = {:e} s",
                    self.detector.envelope_width, laser.pulse_width
                ),
            });
        }
        Ok(())
    }

    /// Canonical flat serialization: every key that affects the computed
    /// output, sorted, one per line. `output_dir` is deliberately absent —
    /// the hash identifies what is computed, not where it lands, so moving
    /// artifacts between directories preserves their provenance stamp.
    pub fn to_canonical_text(&self) -> String {
        let mut pairs = self.to_key_values();
        pairs.sort();
        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(&k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// FNV-1a hash of the canonical serialization.
    pub fn config_hash(&self) -> u64 {
        fnv1a64(self.to_canonical_text().as_bytes())
    }

    fn to_key_values(&self) -> Vec<(String, String)> {
        let laser = self.laser();
        let f = |x: f64| format!("{x:?}");
        vec![
            ("laser.reflectivity".into(), f(laser.reflectivity)),
            ("laser.refractive_index".into(), f(laser.refractive_index)),
            ("laser.cavity_length".into(), f(laser.cavity_length)),
            ("laser.alpha_abs".into(), f(laser.alpha_abs)),
            ("laser.gamma_cav".into(), f(laser.gamma_cav)),
            ("laser.gamma_total".into(), f(laser.gamma_total)),
            ("laser.bias_fraction".into(), f(laser.bias_fraction)),
            ("laser.peak_power".into(), f(laser.peak_power_photons_per_s)),
            ("laser.sat_photons".into(), f(laser.sat_cavity_photons)),
            ("laser.pulse_width".into(), f(laser.pulse_width)),
            ("laser.prf".into(), f(laser.prf)),
            ("laser.n_thermal".into(), f(laser.n_thermal)),
            ("laser.energy_spread_rel".into(), f(laser.energy_spread_rel)),
            ("laser.amp_phase_noise".into(), f(laser.amp_phase_noise)),
            ("cycle.t_low".into(), f(self.cycle.t_low)),
            ("cycle.t_high".into(), f(self.cycle.t_high)),
            ("cycle.dt".into(), f(self.cycle.dt)),
            ("mzi.t_sq".into(), f(self.mzi.t_sq)),
            ("mzi.r_sq".into(), f(self.mzi.r_sq)),
            ("mzi.visibility".into(), f(self.mzi.visibility)),
            ("mzi.phi_loop".into(), f(self.mzi.phi_loop)),
            ("mzi.t_loop".into(), f(self.mzi.t_loop)),
            ("mzi.thermal_coeff".into(), f(self.mzi.thermal_coeff)),
            ("mzi.temp_ref".into(), f(self.mzi.temp_ref)),
            ("detector.sample_rate".into(), f(self.detector.sample_rate)),
            ("detector.adc_bits".into(), self.detector.adc_bits.to_string()),
            ("detector.adc_min".into(), f(self.detector.adc_range.0)),
            ("detector.adc_max".into(), f(self.detector.adc_range.1)),
            (
                "detector.highpass_cutoff".into(),
                f(self.detector.highpass_cutoff),
            ),
            (
                "detector.input_bandwidth".into(),
                f(self.detector.input_bandwidth),
            ),
            ("detector.noise_sigma".into(), f(self.detector.noise_sigma)),
            ("detector.responsivity".into(), f(self.detector.responsivity)),
            (
                "detector.samples_per_pulse".into(),
                self.detector.samples_per_pulse.to_string(),
            ),
            (
                "detector.envelope_width".into(),
                f(self.detector.envelope_width),
            ),
            (
                "extractor.digest_bits".into(),
                self.extractor.digest_bits.to_string(),
            ),
            (
                "extractor.input_block_bits".into(),
                self.extractor.input_block_bits.to_string(),
            ),
            ("pulses".into(), self.n_pulses.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}

/// Parse a configuration file's text: defaults overlaid with the given
/// keys. Derived parameters (`cycle.t_low`, `mzi.t_loop`,
/// `detector.samples_per_pulse`, `detector.envelope_width`) follow
/// `laser.prf` / `laser.pulse_width` unless set explicitly.
pub fn parse_config_text(text: &str) -> Result<PipelineConfig, ConfigError> {
    let mut cfg = PipelineConfig::default();
    let mut explicit: BTreeSet<String> = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            return Err(ConfigError::MalformedLine {
                line,
                text: stripped.to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if !explicit.insert(key.to_string()) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        apply_key(&mut cfg, key, value, line)?;
    }
    // Re-derive rate-coupled parameters that were not pinned by the file.
    let prf = cfg.laser().prf;
    if !explicit.contains("cycle.t_low") {
        cfg.cycle.t_low = 1.0 / prf - cfg.cycle.t_high;
    }
    if !explicit.contains("mzi.t_loop") {
        cfg.mzi.t_loop = 1.0 / prf;
    }
    if !explicit.contains("detector.samples_per_pulse") {
        cfg.detector.samples_per_pulse = samples_per_pulse(cfg.detector.sample_rate, prf);
    }
    if !explicit.contains("detector.envelope_width") {
        cfg.detector.envelope_width = cfg.cycle.laser.pulse_width;
    }
    Ok(cfg)
}

fn apply_key(
    cfg: &mut PipelineConfig,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), ConfigError> {
    let bad = |wanted: &'static str| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        wanted,
    };
    let as_f64 = || value.parse::<f64>().map_err(|_| bad("a number"));
    let as_count = || parse_count(value).ok_or_else(|| bad("a non-negative integer"));

    let laser = &mut cfg.cycle.laser;
    match key {
        "laser.reflectivity" => laser.reflectivity = as_f64()?,
        "laser.refractive_index" => laser.refractive_index = as_f64()?,
        "laser.cavity_length" => laser.cavity_length = as_f64()?,
        "laser.alpha_abs" => laser.alpha_abs = as_f64()?,
        "laser.gamma_cav" => laser.gamma_cav = as_f64()?,
        "laser.gamma_total" => laser.gamma_total = as_f64()?,
        "laser.bias_fraction" => laser.bias_fraction = as_f64()?,
        "laser.peak_power" => laser.peak_power_photons_per_s = as_f64()?,
        "laser.sat_photons" => laser.sat_cavity_photons = as_f64()?,
        "laser.pulse_width" => laser.pulse_width = as_f64()?,
        "laser.prf" => laser.prf = as_f64()?,
        "laser.n_thermal" => laser.n_thermal = as_f64()?,
        "laser.energy_spread_rel" => laser.energy_spread_rel = as_f64()?,
        "laser.amp_phase_noise" => laser.amp_phase_noise = as_f64()?,
        "cycle.t_low" => cfg.cycle.t_low = as_f64()?,
        "cycle.t_high" => cfg.cycle.t_high = as_f64()?,
        "cycle.dt" => cfg.cycle.dt = as_f64()?,
        "mzi.t_sq" => cfg.mzi.t_sq = as_f64()?,
        "mzi.r_sq" => cfg.mzi.r_sq = as_f64()?,
        "mzi.visibility" => cfg.mzi.visibility = as_f64()?,
        "mzi.phi_loop" => cfg.mzi.phi_loop = as_f64()?,
        "mzi.t_loop" => cfg.mzi.t_loop = as_f64()?,
        "mzi.thermal_coeff" => cfg.mzi.thermal_coeff = as_f64()?,
        "mzi.temp_ref" => cfg.mzi.temp_ref = as_f64()?,
        "detector.sample_rate" => cfg.detector.sample_rate = as_f64()?,
        "detector.adc_bits" => {
            cfg.detector.adc_bits = as_count()?.try_into().map_err(|_| bad("a small integer"))?
        }
        "detector.adc_min" => cfg.detector.adc_range.0 = as_f64()?,
        "detector.adc_max" => cfg.detector.adc_range.1 = as_f64()?,
        "detector.highpass_cutoff" => cfg.detector.highpass_cutoff = as_f64()?,
        "detector.input_bandwidth" => cfg.detector.input_bandwidth = as_f64()?,
        "detector.noise_sigma" => cfg.detector.noise_sigma = as_f64()?,
        "detector.responsivity" => cfg.detector.responsivity = as_f64()?,
        "detector.samples_per_pulse" => {
            cfg.detector.samples_per_pulse = as_count()? as usize;
        }
        "detector.envelope_width" => cfg.detector.envelope_width = as_f64()?,
        "extractor.digest_bits" => cfg.extractor.digest_bits = as_count()? as usize,
        "extractor.input_block_bits" => cfg.extractor.input_block_bits = as_count()? as usize,
        "pulses" => cfg.n_pulses = as_count()? as usize,
        "seed" => cfg.seed = as_count()?,
        "output_dir" => cfg.output_dir = PathBuf::from(value),
        _ => {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

/// Parse a non-negative integer count, accepting scientific notation
/// (`1e6`) when it denotes an exact integer.
pub fn parse_count(value: &str) -> Option<u64> {
    if let Ok(n) = value.parse::<u64>() {
        return Some(n);
    }
    match value.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => {
            Some(x as u64)
        }
        _ => None,
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}
