//! Unbalanced Mach–Zehnder interferometer: converts the random optical
//! phases of successive pulses into random pulse energies.
//!
//! One arm delays the pulse train by exactly one repetition period, so pulse
//! `i` (through the delay arm, power weight `r_sq`) overlaps pulse `i+1`
//! (direct arm, power weight `t_sq`) at the output coupler. The combined
//! pulse energy is
//!
//! ```text
//! u_out = u + v + 2·visibility·sqrt(u·v)·cos(dphi − phi_loop)
//! ```
//!
//! with `u = r_sq·G_i`, `v = t_sq·G_{i+1}`, and `dphi = φ_i − φ_{i+1}`.
//! Uniform, independent phases make `u_out` follow an arcsine-shaped law
//! that is invariant under the loop phase — the signature that the energy
//! randomness is inherited from phase diffusion and not from the
//! interferometer's own drift.

use thiserror::Error;

use crate::laser::PulseTrain;

/// Errors from interferometer configuration or processing.
#[derive(Debug, Error, PartialEq)]
pub enum MziError {
    #[error("invalid interferometer parameters: {0}")]
    InvalidParams(String),
    #[error("pulse energies must be non-negative, got u={u}, v={v}")]
    NegativeEnergy { u: f64, v: f64 },
    #[error("need at least 2 pulses to interfere, got {0}")]
    TooFewPulses(usize),
    #[error("temperature profile has {got} entries but {expected} records are produced")]
    ProfileLengthMismatch { expected: usize, got: usize },
    #[error("visibility estimation needs at least {needed} records, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("mean arm energies must be positive, got u_mean={u_mean}, v_mean={v_mean}")]
    NonPositiveMean { u_mean: f64, v_mean: f64 },
}

/// Interferometer configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MziParams {
    /// Power transmission of the direct (short) path.
    pub t_sq: f64,
    /// Power reflection into the delay (long) path.
    pub r_sq: f64,
    /// Interference visibility `|g|` at the loop delay, in `[0, 1]`.
    pub visibility: f64,
    /// Static loop phase (radians).
    pub phi_loop: f64,
    /// Loop delay (s); must equal one pulse period for temporal overlap.
    pub t_loop: f64,
    /// Loop-phase temperature sensitivity (radians per °C).
    pub thermal_coeff: f64,
    /// Reference temperature (°C) at which the loop phase equals `phi_loop`.
    pub temp_ref: f64,
}

impl Default for MziParams {
    fn default() -> Self {
        Self {
            t_sq: 0.498,
            r_sq: 0.403,
            visibility: 0.9022,
            phi_loop: 0.0,
            t_loop: 1.0 / 97.6e6,
            thermal_coeff: std::f64::consts::TAU / 0.03,
            temp_ref: 25.0,
        }
    }
}

impl MziParams {
    /// Validate the configuration; excess loss (`t_sq + r_sq < 1`) is
    /// allowed, gain is not.
    pub fn validate(&self) -> Result<(), MziError> {
        let check_unit = |name: &str, x: f64| -> Result<(), MziError> {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(MziError::InvalidParams(format!(
                    "{name} must be in [0, 1], got {x}"
                )))
            }
        };
        check_unit("t_sq", self.t_sq)?;
        check_unit("r_sq", self.r_sq)?;
        check_unit("visibility", self.visibility)?;
        if self.t_sq + self.r_sq > 1.0 + 1e-12 {
            return Err(MziError::InvalidParams(format!(
                "t_sq + r_sq = {} exceeds 1 (passive coupler)",
                self.t_sq + self.r_sq
            )));
        }
        if !(self.t_loop > 0.0) {
            return Err(MziError::InvalidParams(format!(
                "t_loop must be positive, got {}",
                self.t_loop
            )));
        }
        if !self.phi_loop.is_finite() || !self.thermal_coeff.is_finite() {
            return Err(MziError::InvalidParams(
                "phi_loop and thermal_coeff must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Effective loop phase at a given fiber temperature (°C).
    pub fn loop_phase_at(&self, temp: f64) -> f64 {
        self.phi_loop + self.thermal_coeff * (temp - self.temp_ref)
    }
}

/// One interferometer output: the combined pulse energy together with the
/// per-arm inputs and phase difference that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    /// Output pulse energy (photons).
    pub u_out: f64,
    /// Delay-arm input energy `r_sq·G_i` (photons).
    pub u_in: f64,
    /// Direct-arm input energy `t_sq·G_{i+1}` (photons).
    pub v_in: f64,
    /// Phase difference `φ_i − φ_{i+1}`, wrapped to `(−π, π]` (radians).
    pub dphi: f64,
}

/// Two-beam interference energy at the primary output port.
pub fn interfere(u: f64, v: f64, dphi: f64, p: &MziParams) -> Result<f64, MziError> {
    p.validate()?;
    if u < 0.0 || v < 0.0 {
        return Err(MziError::NegativeEnergy { u, v });
    }
    Ok(interference_energy(u, v, dphi, p.visibility, p.phi_loop))
}

/// Two-beam interference energy at the complementary output port: the
/// cosine sign is flipped, so the two ports of a lossless coupler
/// (`t_sq + r_sq = 1`) conserve energy record by record.
pub fn interfere_complementary(u: f64, v: f64, dphi: f64, p: &MziParams) -> Result<f64, MziError> {
    p.validate()?;
    if u < 0.0 || v < 0.0 {
        return Err(MziError::NegativeEnergy { u, v });
    }
    Ok(u + v - 2.0 * p.visibility * (u * v).sqrt() * (dphi - p.phi_loop).cos())
}

fn interference_energy(u: f64, v: f64, dphi: f64, visibility: f64, phi: f64) -> f64 {
    u + v + 2.0 * visibility * (u * v).sqrt() * (dphi - phi).cos()
}

fn wrap_phase(x: f64) -> f64 {
    let wrapped = x.rem_euclid(std::f64::consts::TAU);
    if wrapped > std::f64::consts::PI {
        wrapped - std::f64::consts::TAU
    } else {
        wrapped
    }
}

/// Interfere each pulse with its successor at the primary port: record `i`
/// combines pulse `i` (weight `r_sq`) with pulse `i+1` (weight `t_sq`), so
/// `n` pulses yield `n − 1` records.
pub fn transform_train(train: &PulseTrain, p: &MziParams) -> Result<Vec<EnergyRecord>, MziError> {
    transform_with(train, p, |u, v, dphi| {
        interference_energy(u, v, dphi, p.visibility, p.phi_loop)
    })
}

/// The complementary output port of [`transform_train`]: weights `t_sq` and
/// `r_sq` exchanged and the cosine sign flipped.
pub fn transform_train_complementary(
    train: &PulseTrain,
    p: &MziParams,
) -> Result<Vec<EnergyRecord>, MziError> {
    p.validate()?;
    if train.pulses.len() < 2 {
        return Err(MziError::TooFewPulses(train.pulses.len()));
    }
    Ok(train
        .pulses
        .windows(2)
        .map(|pair| {
            let u = p.t_sq * pair[0].energy;
            let v = p.r_sq * pair[1].energy;
            let dphi = wrap_phase(pair[0].phase - pair[1].phase);
            EnergyRecord {
                u_out: u + v
                    - 2.0 * p.visibility * (u * v).sqrt() * (dphi - p.phi_loop).cos(),
                u_in: u,
                v_in: v,
                dphi,
            }
        })
        .collect())
}

/// [`transform_train`] with the loop phase driven by a per-record fiber
/// temperature profile (°C): record `i` sees
/// `phi_loop + thermal_coeff·(temp_profile[i] − temp_ref)`.
pub fn sweep_loop_phase(
    train: &PulseTrain,
    p: &MziParams,
    temp_profile: &[f64],
) -> Result<Vec<EnergyRecord>, MziError> {
    let expected = train.pulses.len().saturating_sub(1);
    if temp_profile.len() != expected {
        return Err(MziError::ProfileLengthMismatch {
            expected,
            got: temp_profile.len(),
        });
    }
    let mut next = 0usize;
    transform_with(train, p, |u, v, dphi| {
        let phi = p.loop_phase_at(temp_profile[next]);
        next += 1;
        interference_energy(u, v, dphi, p.visibility, phi)
    })
}

fn transform_with(
    train: &PulseTrain,
    p: &MziParams,
    mut energy: impl FnMut(f64, f64, f64) -> f64,
) -> Result<Vec<EnergyRecord>, MziError> {
    p.validate()?;
    if train.pulses.len() < 2 {
        return Err(MziError::TooFewPulses(train.pulses.len()));
    }
    Ok(train
        .pulses
        .windows(2)
        .map(|pair| {
            let u = p.r_sq * pair[0].energy;
            let v = p.t_sq * pair[1].energy;
            let dphi = wrap_phase(pair[0].phase - pair[1].phase);
            EnergyRecord {
                u_out: energy(u, v, dphi),
                u_in: u,
                v_in: v,
                dphi,
            }
        })
        .collect())
}

/// Moment estimator of the interference visibility from output-energy
/// spread: `std(u_out) / sqrt(2·u_mean·v_mean)`, exploiting
/// `Var(cos Θ) = 1/2` for uniform phase.
pub fn estimate_visibility(u_out: &[f64], u_mean: f64, v_mean: f64) -> Result<f64, MziError> {
    const MIN_RECORDS: usize = 1000;
    if u_out.len() < MIN_RECORDS {
        return Err(MziError::InsufficientSamples {
            needed: MIN_RECORDS,
            got: u_out.len(),
        });
    }
    if !(u_mean > 0.0) || !(v_mean > 0.0) {
        return Err(MziError::NonPositiveMean { u_mean, v_mean });
    }
    let n = u_out.len() as f64;
    let mean = u_out.iter().sum::<f64>() / n;
    let var = u_out.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok(var.sqrt() / (2.0 * u_mean * v_mean).sqrt())
}

/// Convenience wrapper: visibility estimate using the records' own arm
/// energies for the means.
pub fn estimate_visibility_from_records(records: &[EnergyRecord]) -> Result<f64, MziError> {
    if records.is_empty() {
        return Err(MziError::InsufficientSamples {
            needed: 1000,
            got: 0,
        });
    }
    let n = records.len() as f64;
    let u_mean = records.iter().map(|r| r.u_in).sum::<f64>() / n;
    let v_mean = records.iter().map(|r| r.v_in).sum::<f64>() / n;
    let outputs: Vec<f64> = records.iter().map(|r| r.u_out).collect();
    estimate_visibility(&outputs, u_mean, v_mean)
}

/// CDF of the arcsine-shaped law followed by `c + A·cos Θ` for uniform
/// phase `Θ`: the analytic reference for the output-energy distribution at
/// fixed arm energies.
pub fn arcsine_cdf(x: f64, center: f64, amplitude: f64) -> f64 {
    if amplitude <= 0.0 {
        return if x < center { 0.0 } else { 1.0 };
    }
    let z = (x - center) / amplitude;
    if z <= -1.0 {
        0.0
    } else if z >= 1.0 {
        1.0
    } else {
        1.0 - z.acos() / std::f64::consts::PI
    }
}
