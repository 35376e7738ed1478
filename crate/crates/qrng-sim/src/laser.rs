//! Gain-switched laser cycle: below-threshold phase randomization and
//! above-threshold amplification to saturation.
//!
//! Below threshold the intracavity field obeys the damped, noise-driven
//! Langevin equation (rotating frame)
//!
//! ```text
//! da = −(γ/2)·a·dt + sqrt(γ·n_thermal)·dW_complex
//! ```
//!
//! whose stationary state is a circularly-symmetric complex Gaussian — a
//! thermal state with mean photon number `n_thermal` and uniformly random
//! phase. Gain switching then amplifies whatever field is present to a
//! saturated level while preserving its phase, so successive pulses carry
//! independent uniform phases provided the below-threshold dwell is long
//! enough to erase the previous pulse's coherent remnant.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::model::{CavityField, LaserParams};
use crate::rng::{complex_standard_normal, from_seed, standard_normal};

/// Errors from gain-cycle configuration or simulation.
#[derive(Debug, Error, PartialEq)]
pub enum LaserError {
    #[error("invalid gain-cycle configuration: {0}")]
    InvalidConfig(String),
    #[error("pulse train needs at least one pulse")]
    EmptyTrain,
}

/// Timing of one gain-switching cycle plus the laser it drives.
#[derive(Debug, Clone, PartialEq)]
pub struct GainCycleConfig {
    /// Below-threshold dwell time (s).
    pub t_low: f64,
    /// Above-threshold dwell time (s).
    pub t_high: f64,
    /// Integration step for the below-threshold stochastic evolution (s).
    pub dt: f64,
    /// The laser being cycled.
    pub laser: LaserParams,
}

impl Default for GainCycleConfig {
    fn default() -> Self {
        let laser = LaserParams::default();
        let t_high = 1e-9;
        Self {
            t_low: 1.0 / laser.prf - t_high,
            t_high,
            dt: 1e-14,
            laser,
        }
    }
}

impl GainCycleConfig {
    /// Validate the configuration; returns the first violation found.
    ///
    /// The step-size bound `dt ≤ 0.01/γ` keeps the explicit integrator at
    /// least 100 steps per decay constant; the dwell times must tile the
    /// pulse period exactly.
    pub fn validate(&self) -> Result<(), LaserError> {
        self.laser
            .validate()
            .map_err(|e| LaserError::InvalidConfig(e.to_string()))?;
        if !(self.t_low >= 0.0) {
            return Err(LaserError::InvalidConfig(format!(
                "t_low must be non-negative, got {}",
                self.t_low
            )));
        }
        if !(self.t_high > 0.0) {
            return Err(LaserError::InvalidConfig(format!(
                "t_high must be positive, got {}",
                self.t_high
            )));
        }
        if !(self.dt > 0.0) {
            return Err(LaserError::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        let dt_max = 0.01 / self.laser.gamma_total;
        if self.dt > dt_max * (1.0 + 1e-12) {
            return Err(LaserError::InvalidConfig(format!(
                "dt = {:.3e} exceeds 0.01/gamma_total = {:.3e}",
                self.dt, dt_max
            )));
        }
        let period = 1.0 / self.laser.prf;
        if (self.t_low + self.t_high - period).abs() > 1e-12 {
            return Err(LaserError::InvalidConfig(format!(
                "t_low + t_high = {:.15e} does not tile the pulse period {:.15e}",
                self.t_low + self.t_high,
                period
            )));
        }
        Ok(())
    }

    fn n_steps(&self) -> u64 {
        (self.t_low / self.dt).round() as u64
    }
}

/// One emitted optical pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalPulse {
    /// Pulse-integrated energy (photons).
    pub energy: f64,
    /// Optical phase (radians, in `[0, 2π)`).
    pub phase: f64,
    /// Envelope duration (s), full width.
    pub envelope_width: f64,
    /// `|coherent remnant|² / n_thermal` at the moment amplification starts:
    /// how much of the previous pulse's phase survived, relative to the
    /// thermal background that randomizes it.
    pub residual_fraction: f64,
}

/// An ordered train of emitted pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    /// Pulses in emission order, spaced `1/prf` apart.
    pub pulses: Vec<OpticalPulse>,
    /// Pulse repetition frequency (Hz).
    pub prf: f64,
    /// Seed that reproduces this train exactly.
    pub seed: u64,
}

/// Explicit Euler–Maruyama integration of the below-threshold Langevin
/// dynamics over `t_low`, one step per `dt`:
///
/// ```text
/// a ← a·(1 − γ·dt/2) + sqrt(γ·n_thermal/2)·sqrt(dt)·(ξ_re + i·ξ_im)
/// ```
///
/// with independent standard normals per component, so the stationary state
/// has `E|a|² = n_thermal`. The deterministic coherent remnant decays by the
/// same per-step factor. With noise disabled (`n_thermal` scaled to zero via
/// a zero-diffusion laser, or trivially `t_low = 0`) this matches the closed
/// form `a(t) = a(0)·exp(−γt/2)` to the integrator's documented bias.
///
/// This is the reference integrator; [`evolve_below_threshold_aggregate`]
/// composes the identical chain into a single update and is what
/// [`generate_pulse_train`] uses in the hot path.
pub fn evolve_below_threshold(
    field: CavityField,
    cfg: &GainCycleConfig,
    rng: &mut impl Rng,
) -> Result<CavityField, LaserError> {
    cfg.validate()?;
    let gamma = cfg.laser.gamma_total;
    let half_step = gamma * cfg.dt / 2.0;
    let diffusion = (gamma * cfg.laser.n_thermal / 2.0).sqrt() * cfg.dt.sqrt();
    let decay = 1.0 - half_step;

    let mut amplitude = field.amplitude;
    let mut remnant = field.coherent_remnant;
    for _ in 0..cfg.n_steps() {
        amplitude = amplitude * decay + diffusion * complex_standard_normal(rng);
        remnant *= decay;
    }
    Ok(CavityField {
        amplitude,
        coherent_remnant: remnant,
        t: field.t + cfg.t_low,
    })
}

/// Exact single-draw composition of the Euler–Maruyama chain in
/// [`evolve_below_threshold`].
///
/// `n` steps of `a ← a·(1−h) + s·sqrt(dt)·ξ` (with `h = γ·dt/2` and
/// independent complex normals `ξ`) compose to
///
/// ```text
/// a ← a·(1−h)^n + G·ξ,   G² = s²·dt·(1 − (1−h)^{2n}) / (1 − (1−h)²)
/// ```
///
/// because a sum of independent complex Gaussians is a complex Gaussian with
/// the summed variance. The result has *exactly* the same distribution as
/// the stepwise chain — same geometric decay of the mean, same accumulated
/// noise variance — while consuming one complex draw instead of `n`.
pub fn evolve_below_threshold_aggregate(
    field: CavityField,
    cfg: &GainCycleConfig,
    rng: &mut impl Rng,
) -> Result<CavityField, LaserError> {
    cfg.validate()?;
    let n = cfg.n_steps();
    if n == 0 {
        return Ok(field);
    }
    let gamma = cfg.laser.gamma_total;
    let h = gamma * cfg.dt / 2.0;
    let log_decay = (n as f64) * (1.0 - h).ln();
    let decay = log_decay.exp();
    let s_sq_dt = gamma * cfg.laser.n_thermal / 2.0 * cfg.dt;
    let denom = 1.0 - (1.0 - h) * (1.0 - h);
    let g = (s_sq_dt * (1.0 - (2.0 * log_decay).exp()) / denom).sqrt();

    Ok(CavityField {
        amplitude: field.amplitude * decay + g * complex_standard_normal(rng),
        coherent_remnant: field.coherent_remnant * decay,
        t: field.t + cfg.t_low,
    })
}

/// Gain-switched amplification to saturation.
///
/// The emitted pulse keeps the phase of the input field (plus optional
/// amplification phase noise), its energy is drawn around the saturation
/// mean `peak_power_photons_per_s × pulse_width` with relative spread
/// `energy_spread_rel`, and `residual_fraction` records how strong the
/// decayed coherent remnant was relative to the thermal background at the
/// moment amplification began.
///
/// A zero-amplitude input (possible only from an exactly-vacuum start) has
/// no defined phase; a uniform phase is drawn for that measure-zero case.
pub fn amplify_above_threshold(
    field: CavityField,
    cfg: &GainCycleConfig,
    rng: &mut impl Rng,
) -> Result<OpticalPulse, LaserError> {
    cfg.validate()?;
    let laser = &cfg.laser;
    // Fixed draw order: energy spread first, then phase noise.
    let energy_z = standard_normal(rng);
    let phase_xi = standard_normal(rng);

    let mean_energy = laser.mean_pulse_energy();
    let mut energy = mean_energy * (1.0 + laser.energy_spread_rel * energy_z);
    if !(energy > 0.0) {
        energy = mean_energy * 1e-12;
    }

    let mut phase = if field.amplitude.norm_sqr() > 0.0 {
        field.amplitude.arg()
    } else {
        rng.gen::<f64>() * std::f64::consts::TAU
    };
    phase += laser.amp_phase_noise * phase_xi;
    phase = phase.rem_euclid(std::f64::consts::TAU);

    Ok(OpticalPulse {
        energy,
        phase,
        envelope_width: laser.pulse_width,
        residual_fraction: field.coherent_remnant.norm_sqr() / laser.n_thermal,
    })
}

/// The saturated intracavity field left behind right after a pulse: fully
/// coherent at the pulse phase with `sat_cavity_photons` photons.
fn saturated_field(phase: f64, laser: &LaserParams, t: f64) -> CavityField {
    let amplitude = Complex64::from_polar(laser.sat_cavity_photons.sqrt(), phase);
    CavityField {
        amplitude,
        coherent_remnant: amplitude,
        t,
    }
}

/// Simulate `n_pulses` complete gain-switching cycles from a cold (vacuum)
/// start, feeding each cycle's saturated end state into the next cycle's
/// below-threshold decay. Deterministic for a fixed seed.
pub fn generate_pulse_train(
    n_pulses: usize,
    cfg: &GainCycleConfig,
    seed: u64,
) -> Result<PulseTrain, LaserError> {
    if n_pulses == 0 {
        return Err(LaserError::EmptyTrain);
    }
    cfg.validate()?;
    let mut rng = from_seed(seed);
    let mut field = CavityField::vacuum();
    let mut pulses = Vec::with_capacity(n_pulses);
    for _ in 0..n_pulses {
        field = evolve_below_threshold_aggregate(field, cfg, &mut rng)?;
        let pulse = amplify_above_threshold(field, cfg, &mut rng)?;
        field = saturated_field(pulse.phase, &cfg.laser, field.t + cfg.t_high);
        pulses.push(pulse);
    }
    Ok(PulseTrain {
        pulses,
        prf: cfg.laser.prf,
        seed,
    })
}
