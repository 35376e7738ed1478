//! Photodiode → filter → sampling-ADC chain: converts interferometer
//! energy records into integrated, quantized per-pulse measurements with
//! injectable classical noise.
//!
//! Each pulse becomes a Gaussian photocurrent envelope carrying area
//! `responsivity·u_out`, band-limited to `input_bandwidth`, AC-coupled
//! through a `highpass_cutoff` one-pole, and sampled `samples_per_pulse`
//! times with a random sub-sample timing offset per pulse. I.i.d. Gaussian
//! detector noise is added per sample after the filters. The oscilloscope
//! stage sums the samples of a pulse into one value, refers it to the
//! acquisition run's mean (DC coupling of the record batch), and quantizes
//! it on the configured ADC range.
//!
//! The ADC range and the noise magnitude are not free-floating: a
//! calibration pass freezes the range from the tail quantiles of the
//! noiseless output distribution, then bisects `noise_sigma` until the
//! noise-only code entropy at full resolution hits a requested target.
//! Freezing the geometry first matters — the noise entropy at a fixed
//! target is meaningful only against a fixed quantization grid.

use rand::Rng;
use thiserror::Error;

use crate::entropy::code_entropy;
use crate::mzi::EnergyRecord;
use crate::rng::standard_normal;

/// `2·sqrt(2·ln 2)` — converts a Gaussian FWHM to its standard deviation.
const FWHM_OVER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Fraction of probability left outside each side of the ADC range by the
/// calibration pass (per tail, before the guard factor).
pub const CALIBRATION_TAIL_FRACTION: f64 = 3e-3;

/// Multiplicative guard applied to the calibrated half-range.
pub const CALIBRATION_RANGE_GUARD: f64 = 1.01;

/// Errors from the detection chain.
#[derive(Debug, Error, PartialEq)]
pub enum DetectionError {
    #[error("invalid detector parameters: {0}")]
    InvalidParams(String),
    #[error("waveform has {got} samples but samples_per_pulse is {expected}")]
    WrongSampleCount { expected: usize, got: usize },
    #[error("input record batch is empty")]
    EmptyInput,
    #[error("calibration needs at least {needed} records, got {got}")]
    InsufficientCalibrationData { needed: usize, got: usize },
    #[error("noise-entropy target must be in (0, adc_bits), got {0}")]
    InvalidEntropyTarget(f64),
}

/// Detector and digitizer configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    /// ADC sampling rate (samples/s).
    pub sample_rate: f64,
    /// ADC resolution (bits).
    pub adc_bits: u32,
    /// Full-scale input range `(min, max)` in detector units, referred to
    /// the batch baseline.
    pub adc_range: (f64, f64),
    /// AC-coupling highpass cutoff (Hz), single pole.
    pub highpass_cutoff: f64,
    /// Analog input bandwidth (Hz): composite −3 dB point of the two
    /// cascaded lowpass poles.
    pub input_bandwidth: f64,
    /// RMS classical noise per sample (detector units).
    pub noise_sigma: f64,
    /// Detector units per photon.
    pub responsivity: f64,
    /// Samples acquired per pulse.
    pub samples_per_pulse: usize,
    /// FWHM of the detected pulse envelope (s).
    pub envelope_width: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        // adc_range and noise_sigma carry the frozen outcome of
        // calibrate_detector at the default configuration (seed 42,
        // 200k records): half-range from the 0.3% tail quantiles with a 1%
        // guard, noise_sigma bisected to 0.7 bits of noise entropy at b=12.
        let half_range = 1.743_129_304e6;
        Self {
            sample_rate: 2.5e9,
            adc_bits: 12,
            adc_range: (-half_range, half_range * 2047.0 / 2048.0),
            highpass_cutoff: 40e6,
            input_bandwidth: 200e6,
            noise_sigma: 56.629_286_37,
            responsivity: 1.0,
            samples_per_pulse: 25,
            envelope_width: 400e-12,
        }
    }
}

impl DetectorParams {
    /// Validate the configuration; returns the first violation found.
    pub fn validate(&self) -> Result<(), DetectionError> {
        let positive = |name: &str, x: f64| -> Result<(), DetectionError> {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(DetectionError::InvalidParams(format!(
                    "{name} must be positive and finite, got {x}"
                )))
            }
        };
        positive("sample_rate", self.sample_rate)?;
        positive("highpass_cutoff", self.highpass_cutoff)?;
        positive("input_bandwidth", self.input_bandwidth)?;
        positive("responsivity", self.responsivity)?;
        positive("envelope_width", self.envelope_width)?;
        if !(1..=24).contains(&self.adc_bits) {
            return Err(DetectionError::InvalidParams(format!(
                "adc_bits must be in [1, 24], got {}",
                self.adc_bits
            )));
        }
        if self.samples_per_pulse == 0 {
            return Err(DetectionError::InvalidParams(
                "samples_per_pulse must be at least 1".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(DetectionError::InvalidParams(format!(
                "noise_sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        if !(self.adc_range.0 < self.adc_range.1) {
            return Err(DetectionError::InvalidParams(format!(
                "adc_range must satisfy min < max, got ({}, {})",
                self.adc_range.0, self.adc_range.1
            )));
        }
        Ok(())
    }

    fn code_count(&self) -> u32 {
        1u32 << self.adc_bits
    }
}

/// Samples acquired per pulse at a given sampling rate and repetition
/// frequency: `floor(sample_rate / prf)`.
pub fn samples_per_pulse(sample_rate: f64, prf: f64) -> usize {
    (sample_rate / prf).floor() as usize
}

/// One digitized pulse measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitizedRecord {
    /// ADC code of the integrated pulse, in `[0, 2^adc_bits − 1]`.
    pub code: u32,
    /// True when the integrated value lay at or beyond either rail of the
    /// ADC range and was clamped.
    pub saturated: bool,
    /// Optional per-sample codes of the underlying waveform (diagnostics;
    /// not populated by the batch pipeline).
    pub raw_samples: Option<Box<[u32]>>,
}

/// A digitized batch with its baseline and clipping bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitizedBatch {
    /// Per-pulse measurements, in record order.
    pub records: Vec<DigitizedRecord>,
    /// Run mean subtracted from every integrated value before quantization.
    pub baseline: f64,
    /// Number of records whose integrated value was clamped at a rail.
    pub saturated_count: usize,
    /// Number of records whose code equals 0 or full scale (includes the
    /// saturated ones).
    pub rail_count: usize,
}

impl DigitizedBatch {
    /// The codes alone, in record order.
    pub fn codes(&self) -> Vec<u32> {
        self.records.iter().map(|r| r.code).collect()
    }
}

/// Synthesize the sampled detector waveform for one energy record:
/// jittered Gaussian envelope of area `responsivity·u_out`, two cascaded
/// lowpass poles with composite −3 dB at `input_bandwidth`, one highpass
/// pole at `highpass_cutoff`, then per-sample Gaussian noise.
///
/// Randomness consumed per call, in order: one uniform draw for the
/// sub-sample timing offset, then `samples_per_pulse` normal draws for the
/// noise — the noise draws are skipped entirely when `noise_sigma = 0`.
pub fn synthesize_waveform(
    record: &EnergyRecord,
    p: &DetectorParams,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, DetectionError> {
    p.validate()?;
    Ok(synthesize_unchecked(record.u_out, p, rng))
}

fn synthesize_unchecked(u_out: f64, p: &DetectorParams, rng: &mut impl Rng) -> Vec<f64> {
    let spp = p.samples_per_pulse;
    let chi = rng.gen::<f64>() - 0.5;
    let sigma_env = p.envelope_width / FWHM_OVER_SIGMA;
    let inv_two_sigma_sq = 1.0 / (2.0 * sigma_env * sigma_env);

    let mut samples = Vec::with_capacity(spp);
    let mut weight_sum = 0.0;
    for j in 0..spp {
        let t = (j as f64 - spp as f64 / 2.0 + 0.5 + chi) / p.sample_rate;
        let w = (-t * t * inv_two_sigma_sq).exp();
        weight_sum += w;
        samples.push(w);
    }
    let scale = p.responsivity * u_out / weight_sum;
    for s in &mut samples {
        *s *= scale;
    }

    apply_filters(&mut samples, p);

    if p.noise_sigma > 0.0 {
        for s in &mut samples {
            *s += p.noise_sigma * standard_normal(rng);
        }
    }
    samples
}

/// Two cascaded one-pole lowpass sections followed by a one-pole highpass,
/// each reset to a quiescent (zero) state at the start of every pulse.
///
/// A single cascaded pole at `fc` has its −3 dB point at `fc`; two
/// identical poles reach −3 dB at `fc·sqrt(sqrt(2) − 1)`, so each section
/// is tuned to `input_bandwidth / sqrt(sqrt(2) − 1)` to keep the composite
/// bandwidth at the configured value.
fn apply_filters(samples: &mut [f64], p: &DetectorParams) {
    let section_fc = p.input_bandwidth / (std::f64::consts::SQRT_2 - 1.0).sqrt();
    let a = 1.0 - (-std::f64::consts::TAU * section_fc / p.sample_rate).exp();
    for _ in 0..2 {
        let mut acc = 0.0;
        for s in samples.iter_mut() {
            acc += a * (*s - acc);
            *s = acc;
        }
    }
    let b = (-std::f64::consts::TAU * p.highpass_cutoff / p.sample_rate).exp();
    let mut y = 0.0;
    let mut x_prev = 0.0;
    for s in samples.iter_mut() {
        y = b * (y + *s - x_prev);
        x_prev = *s;
        *s = y;
    }
}

/// Sum of a pulse's samples — the oscilloscope's integration stage.
pub fn integrate(samples: &[f64]) -> f64 {
    samples.iter().sum()
}

/// Quantize a baseline-referred value on the ADC range: affine map of
/// `adc_range` onto `[0, 2^adc_bits − 1]`, round half to even, clamp at
/// the rails. Returns the code and whether the value sat at or beyond a
/// rail.
pub fn quantize_value(x: f64, p: &DetectorParams) -> (u32, bool) {
    let (lo, hi) = p.adc_range;
    let max_code = (p.code_count() - 1) as f64;
    let code_f = ((x - lo) / (hi - lo) * max_code).round_ties_even();
    let code = code_f.clamp(0.0, max_code) as u32;
    (code, x <= lo || x >= hi)
}

/// Integrate one pulse's samples and quantize the sum. The caller is
/// responsible for baseline-referring the samples; the batch pipeline in
/// [`digitize_records`] removes the run mean instead.
pub fn integrate_and_quantize(
    samples: &[f64],
    p: &DetectorParams,
) -> Result<DigitizedRecord, DetectionError> {
    p.validate()?;
    if samples.len() != p.samples_per_pulse {
        return Err(DetectionError::WrongSampleCount {
            expected: p.samples_per_pulse,
            got: samples.len(),
        });
    }
    let (code, saturated) = quantize_value(integrate(samples), p);
    Ok(DigitizedRecord {
        code,
        saturated,
        raw_samples: None,
    })
}

/// Analog integrated values (including noise) for a batch of energy
/// records, in record order.
pub fn record_sums(
    records: &[EnergyRecord],
    p: &DetectorParams,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, DetectionError> {
    p.validate()?;
    if records.is_empty() {
        return Err(DetectionError::EmptyInput);
    }
    Ok(records
        .iter()
        .map(|r| integrate(&synthesize_unchecked(r.u_out, p, rng)))
        .collect())
}

/// Refer a batch of integrated values to its run mean and quantize each.
pub fn quantize_sums(sums: &[f64], p: &DetectorParams) -> Result<DigitizedBatch, DetectionError> {
    p.validate()?;
    if sums.is_empty() {
        return Err(DetectionError::EmptyInput);
    }
    let baseline = sums.iter().sum::<f64>() / sums.len() as f64;
    let full_scale = p.code_count() - 1;
    let mut saturated_count = 0;
    let mut rail_count = 0;
    let records = sums
        .iter()
        .map(|&s| {
            let (code, saturated) = quantize_value(s - baseline, p);
            saturated_count += usize::from(saturated);
            rail_count += usize::from(code == 0 || code == full_scale);
            DigitizedRecord {
                code,
                saturated,
                raw_samples: None,
            }
        })
        .collect();
    Ok(DigitizedBatch {
        records,
        baseline,
        saturated_count,
        rail_count,
    })
}

/// Full detection chain for a batch: synthesize, filter, add noise,
/// integrate, baseline-refer to the run mean, quantize.
pub fn digitize_records(
    records: &[EnergyRecord],
    p: &DetectorParams,
    rng: &mut impl Rng,
) -> Result<DigitizedBatch, DetectionError> {
    let sums = record_sums(records, p, rng)?;
    quantize_sums(&sums, p)
}

/// Run the full chain with zero optical input: the classical-noise
/// calibration record used for entropy subtraction.
pub fn capture_noise_reference(
    n_pulses: usize,
    p: &DetectorParams,
    rng: &mut impl Rng,
) -> Result<DigitizedBatch, DetectionError> {
    if n_pulses == 0 {
        return Err(DetectionError::EmptyInput);
    }
    let zero = EnergyRecord {
        u_out: 0.0,
        u_in: 0.0,
        v_in: 0.0,
        dphi: 0.0,
    };
    let records = vec![zero; n_pulses];
    digitize_records(&records, p, rng)
}

/// Outcome of the two-stage detector calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOutcome {
    /// Input parameters with `adc_range` and `noise_sigma` replaced by the
    /// calibrated values.
    pub params: DetectorParams,
    /// Calibrated half-range: `adc_range = (−h, h·(1 − 2/2^adc_bits))`, so
    /// the quiescent (baseline) input lands exactly on a code center.
    pub half_range: f64,
    /// Noise-only code entropy at full resolution achieved by the final
    /// `noise_sigma`, on the calibration draws.
    pub noise_entropy: f64,
}

/// Calibrate the ADC range and the classical-noise magnitude.
///
/// Stage 1 digitizes the provided records noiselessly, refers them to
/// their run mean, and sets the half-range to the larger of the
/// [`CALIBRATION_TAIL_FRACTION`] tail quantiles times
/// [`CALIBRATION_RANGE_GUARD`] — so the code space covers all but a few
/// per-mil of the signal with a small guard band. The range is laid out so
/// the baseline falls on a code center (full scale sits one step inside
/// the positive half-range), which keeps a vanishing noise residue from
/// dithering between two codes.
///
/// Stage 2 freezes that range and bisects `noise_sigma` until the code
/// entropy of noise-only records at `b = adc_bits` reaches
/// `target_noise_entropy` bits. The same noise draws are reused across
/// bisection steps, making the search deterministic and exactly
/// convergent.
pub fn calibrate_detector(
    records: &[EnergyRecord],
    p: &DetectorParams,
    target_noise_entropy: f64,
    rng: &mut impl Rng,
) -> Result<CalibrationOutcome, DetectionError> {
    const MIN_RECORDS: usize = 10_000;
    p.validate()?;
    if records.len() < MIN_RECORDS {
        return Err(DetectionError::InsufficientCalibrationData {
            needed: MIN_RECORDS,
            got: records.len(),
        });
    }
    if !(target_noise_entropy > 0.0 && target_noise_entropy < p.adc_bits as f64) {
        return Err(DetectionError::InvalidEntropyTarget(target_noise_entropy));
    }

    // Stage 1: range from the noiseless signal distribution.
    let mut quiet = p.clone();
    quiet.noise_sigma = 0.0;
    let sums = record_sums(records, &quiet, rng)?;
    let baseline = sums.iter().sum::<f64>() / sums.len() as f64;
    let mut deviations: Vec<f64> = sums.iter().map(|s| s - baseline).collect();
    deviations.sort_by(|a, b| a.partial_cmp(b).expect("sums are finite"));
    let lo_q = quantile_sorted(&deviations, CALIBRATION_TAIL_FRACTION);
    let hi_q = quantile_sorted(&deviations, 1.0 - CALIBRATION_TAIL_FRACTION);
    let half_range = lo_q.abs().max(hi_q.abs()) * CALIBRATION_RANGE_GUARD;

    let mut calibrated = p.clone();
    let ncodes = calibrated.code_count() as f64;
    calibrated.adc_range = (-half_range, half_range * (1.0 - 2.0 / ncodes));

    // Stage 2: fixed noise draws, entropy bisection on their scale.
    let prototypes: Vec<f64> = (0..records.len())
        .map(|_| {
            (0..p.samples_per_pulse)
                .map(|_| standard_normal(rng))
                .sum::<f64>()
        })
        .collect();
    let entropy_at = |sigma: f64, params: &DetectorParams| -> f64 {
        let scaled: Vec<f64> = prototypes.iter().map(|&x| x * sigma).collect();
        let batch = quantize_sums(&scaled, params).expect("calibration batch is nonempty");
        code_entropy(&batch.codes(), params.adc_bits, params.adc_bits)
            .expect("codes are nonempty")
    };
    let mut lo_sigma = 1e-6 * half_range;
    let mut hi_sigma = 0.1 * half_range;
    for _ in 0..40 {
        let mid = 0.5 * (lo_sigma + hi_sigma);
        if entropy_at(mid, &calibrated) < target_noise_entropy {
            lo_sigma = mid;
        } else {
            hi_sigma = mid;
        }
    }
    calibrated.noise_sigma = 0.5 * (lo_sigma + hi_sigma);
    let noise_entropy = entropy_at(calibrated.noise_sigma, &calibrated);

    Ok(CalibrationOutcome {
        params: calibrated,
        half_range,
        noise_entropy,
    })
}

/// Linear-interpolation quantile of an ascending-sorted sample: the value
/// at fractional rank `q·(n−1)`.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}
