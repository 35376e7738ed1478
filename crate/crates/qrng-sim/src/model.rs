//! Physical constants, laser parameter records, and closed-form
//! decay/attenuation arithmetic.
//!
//! The quantities here describe a gain-switched distributed-feedback laser
//! diode: its cavity photon decay rate, the material (gain/absorption)
//! contribution as a function of pump bias, the resulting inter-pulse
//! attenuation, and how far the coherent remnant of one pulse sits below the
//! thermal background when the next pulse starts to build up.

use num_complex::Complex64;
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Errors from domain-validation of the closed-form arithmetic.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("out-coupler reflectivity must lie in (0, 1), got {0}")]
    ReflectivityRange(f64),
    #[error("refractive index must be at least 1, got {0}")]
    IndexRange(f64),
    #[error("cavity length must be positive, got {0}")]
    LengthRange(f64),
    #[error("bias fraction must lie in [0, 1], got {0}")]
    BiasRange(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("laser parameters invalid: {0}")]
    InvalidLaserParams(String),
}

/// Physical constants used by the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Speed of light in vacuum (m/s).
    pub c: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { c: SPEED_OF_LIGHT }
    }
}

/// Laser device parameters.
///
/// Rates are photon-amplitude decay rates `γ` such that the field decays as
/// `exp(−γ t / 2)` and the photon number as `exp(−γ t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserParams {
    /// Out-coupler power reflectivity (dimensionless, in (0, 1)).
    pub reflectivity: f64,
    /// Group refractive index of the cavity (dimensionless).
    pub refractive_index: f64,
    /// Cavity length (m).
    pub cavity_length: f64,
    /// Effective modal absorption of the unpumped gain medium (1/m).
    pub alpha_abs: f64,
    /// Cavity (mirror/out-coupling) decay rate (1/s). Stored device value;
    /// [`cavity_decay_rate`] computes the geometric formula independently.
    pub gamma_cav: f64,
    /// Total below-threshold decay rate (1/s). Stored device value; see
    /// [`total_decay_rate`] for the bias interpolation.
    pub gamma_total: f64,
    /// DC bias as a fraction of threshold current (dimensionless, [0, 1]).
    pub bias_fraction: f64,
    /// Above-threshold photon flux at the pulse peak (photons/s).
    pub peak_power_photons_per_s: f64,
    /// Saturated intracavity photon number (photons).
    pub sat_cavity_photons: f64,
    /// Optical pulse duration (s), full width.
    pub pulse_width: f64,
    /// Pulse repetition frequency (Hz).
    pub prf: f64,
    /// Mean thermal photon number of the attenuation/spontaneous-emission
    /// equilibrium (photons).
    pub n_thermal: f64,
    /// Relative RMS spread of pulse energies around the saturation mean
    /// (dimensionless).
    pub energy_spread_rel: f64,
    /// RMS phase noise added during amplification (radians).
    pub amp_phase_noise: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        Self {
            reflectivity: 0.3,
            refractive_index: 3.6,
            cavity_length: 300e-6,
            alpha_abs: 1e3,
            gamma_cav: 5e10,
            gamma_total: 1e11,
            bias_fraction: 0.7,
            peak_power_photons_per_s: 1.5e16,
            sat_cavity_photons: 3e5,
            pulse_width: 400e-12,
            prf: 97.6e6,
            n_thermal: 1.0,
            energy_spread_rel: 0.01,
            amp_phase_noise: 0.0,
        }
    }
}

impl LaserParams {
    /// Mean emitted pulse energy in photons: peak flux × pulse width.
    pub fn mean_pulse_energy(&self) -> f64 {
        self.peak_power_photons_per_s * self.pulse_width
    }

    /// Validate ranges; returns the first violation found.
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.reflectivity > 0.0 && self.reflectivity < 1.0) {
            return Err(ModelError::ReflectivityRange(self.reflectivity));
        }
        if !(self.refractive_index >= 1.0) {
            return Err(ModelError::IndexRange(self.refractive_index));
        }
        if !(self.cavity_length > 0.0) {
            return Err(ModelError::LengthRange(self.cavity_length));
        }
        if !(self.bias_fraction >= 0.0 && self.bias_fraction <= 1.0) {
            return Err(ModelError::BiasRange(self.bias_fraction));
        }
        for (name, value) in [
            ("gamma_cav", self.gamma_cav),
            ("gamma_total", self.gamma_total),
            ("peak_power_photons_per_s", self.peak_power_photons_per_s),
            ("sat_cavity_photons", self.sat_cavity_photons),
            ("pulse_width", self.pulse_width),
            ("prf", self.prf),
            ("n_thermal", self.n_thermal),
        ] {
            if !(value > 0.0) {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        for (name, value) in [
            ("alpha_abs", self.alpha_abs),
            ("energy_spread_rel", self.energy_spread_rel),
            ("amp_phase_noise", self.amp_phase_noise),
        ] {
            if !(value >= 0.0) {
                return Err(ModelError::Negative { name, value });
            }
        }
        if self.pulse_width >= 1.0 / self.prf {
            return Err(ModelError::InvalidLaserParams(format!(
                "pulse_width {} must be shorter than the pulse period {}",
                self.pulse_width,
                1.0 / self.prf
            )));
        }
        Ok(())
    }
}

/// Intracavity optical field in a frame rotating at the optical carrier.
///
/// `amplitude` is the full stochastic field in sqrt-photon units
/// (`|amplitude|²` = intracavity photon number). `coherent_remnant` tracks
/// the deterministically decayed part of the previous pulse's coherent field
/// through the below-threshold interval; comparing it with the thermal
/// background gives the residual phase-memory diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityField {
    /// Complex field amplitude (sqrt photons).
    pub amplitude: Complex64,
    /// Decayed coherent remnant of the previous pulse (sqrt photons).
    pub coherent_remnant: Complex64,
    /// Absolute time (s).
    pub t: f64,
}

impl CavityField {
    /// The vacuum state at time zero.
    pub fn vacuum() -> Self {
        Self {
            amplitude: Complex64::new(0.0, 0.0),
            coherent_remnant: Complex64::new(0.0, 0.0),
            t: 0.0,
        }
    }

    /// Intracavity photon number `|amplitude|²`.
    pub fn photon_number(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// Cavity photon decay rate from out-coupling: `−c·ln(R) / (2·n·L)`.
pub fn cavity_decay_rate(
    reflectivity: f64,
    refractive_index: f64,
    cavity_length: f64,
    c: f64,
) -> Result<f64, ModelError> {
    if !(reflectivity > 0.0 && reflectivity < 1.0) {
        return Err(ModelError::ReflectivityRange(reflectivity));
    }
    if !(refractive_index >= 1.0) {
        return Err(ModelError::IndexRange(refractive_index));
    }
    if !(cavity_length > 0.0) {
        return Err(ModelError::LengthRange(cavity_length));
    }
    if !(c > 0.0) {
        return Err(ModelError::NonPositive { name: "c", value: c });
    }
    Ok(-c * reflectivity.ln() / (2.0 * refractive_index * cavity_length))
}

/// Material decay rate at a given pump bias: linear interpolation between
/// `c·alpha_abs/n` at zero bias (unpumped absorption) and `−gamma_cav` at
/// threshold (material gain exactly cancels the cavity loss).
pub fn material_decay_rate(
    bias_fraction: f64,
    alpha_abs: f64,
    refractive_index: f64,
    c: f64,
    gamma_cav: f64,
) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&bias_fraction) {
        return Err(ModelError::BiasRange(bias_fraction));
    }
    if !(alpha_abs >= 0.0) {
        return Err(ModelError::Negative { name: "alpha_abs", value: alpha_abs });
    }
    if !(refractive_index >= 1.0) {
        return Err(ModelError::IndexRange(refractive_index));
    }
    if !(c > 0.0) {
        return Err(ModelError::NonPositive { name: "c", value: c });
    }
    if !(gamma_cav > 0.0) {
        return Err(ModelError::NonPositive { name: "gamma_cav", value: gamma_cav });
    }
    let at_zero = c * alpha_abs / refractive_index;
    let at_threshold = -gamma_cav;
    Ok((1.0 - bias_fraction) * at_zero + bias_fraction * at_threshold)
}

/// Total below-threshold decay rate at a given bias:
/// `gamma_cav + material_decay_rate(bias)`, using the stored `gamma_cav`.
pub fn total_decay_rate(
    bias_fraction: f64,
    p: &LaserParams,
    c: f64,
) -> Result<f64, ModelError> {
    let mat = material_decay_rate(
        bias_fraction,
        p.alpha_abs,
        p.refractive_index,
        c,
        p.gamma_cav,
    )?;
    Ok(p.gamma_cav + mat)
}

/// Power attenuation of `exp(−γ t)` expressed in dB (positive number):
/// `10·log10(e)·γ·t`.
pub fn attenuation_db(gamma: f64, duration: f64) -> Result<f64, ModelError> {
    if !(gamma > 0.0) {
        return Err(ModelError::NonPositive { name: "gamma", value: gamma });
    }
    if !(duration >= 0.0) {
        return Err(ModelError::Negative { name: "duration", value: duration });
    }
    Ok(10.0 * std::f64::consts::E.log10() * gamma * duration)
}

/// How many bits the decayed coherent remnant of a pulse sits below the
/// thermal background: `residual = sat_photons·10^(−attenuation_db/10)`, and
/// the margin is `log2(n_thermal / residual)`.
///
/// Positive values mean the remnant is buried under the thermal noise by that
/// many bits; the margin grows by `log2(10)/10 ≈ 0.332` bits per dB.
pub fn residual_coherence_bits(
    sat_photons: f64,
    attenuation_db: f64,
    n_thermal: f64,
) -> Result<f64, ModelError> {
    for (name, value) in [
        ("sat_photons", sat_photons),
        ("attenuation_db", attenuation_db),
        ("n_thermal", n_thermal),
    ] {
        if !(value > 0.0) {
            return Err(ModelError::NonPositive { name, value });
        }
    }
    let residual = sat_photons * 10f64.powf(-attenuation_db / 10.0);
    Ok((n_thermal / residual).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(x: f64, reference: f64) -> f64 {
        ((x - reference) / reference).abs()
    }

    #[test]
    fn speed_of_light_is_accurate() {
        assert!(rel_err(SPEED_OF_LIGHT, 299_792_458.0) < 1e-3);
        assert_eq!(PhysicalConstants::default().c, SPEED_OF_LIGHT);
    }

    #[test]
    fn cavity_decay_rate_default_geometry() {
        let rate = cavity_decay_rate(0.3, 3.6, 300e-6, SPEED_OF_LIGHT).unwrap();
        assert!(rel_err(rate, 1.6711e11) < 1e-3, "rate = {rate:.4e}");
    }

    #[test]
    fn cavity_decay_rate_lossless_limit() {
        let rate = cavity_decay_rate(1.0 - 1e-12, 3.6, 300e-6, SPEED_OF_LIGHT).unwrap();
        assert!((0.0..1.0).contains(&rate), "rate = {rate:.4e}");
    }

    #[test]
    fn cavity_decay_rate_units_sanity() {
        // R = e^-2, n = 1, L = c/4 gives exactly 4 s^-1.
        let c = SPEED_OF_LIGHT;
        let rate = cavity_decay_rate((-2.0f64).exp(), 1.0, c / 4.0, c).unwrap();
        assert!((rate - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cavity_decay_rate_monotone_in_r_and_l() {
        let base = cavity_decay_rate(0.3, 3.6, 300e-6, SPEED_OF_LIGHT).unwrap();
        let higher_r = cavity_decay_rate(0.4, 3.6, 300e-6, SPEED_OF_LIGHT).unwrap();
        let longer_l = cavity_decay_rate(0.3, 3.6, 400e-6, SPEED_OF_LIGHT).unwrap();
        assert!(higher_r < base);
        assert!(longer_l < base);
    }

    #[test]
    fn cavity_decay_rate_domain_errors() {
        assert!(cavity_decay_rate(0.0, 3.6, 300e-6, SPEED_OF_LIGHT).is_err());
        assert!(cavity_decay_rate(1.0, 3.6, 300e-6, SPEED_OF_LIGHT).is_err());
        assert!(cavity_decay_rate(0.3, 3.6, 0.0, SPEED_OF_LIGHT).is_err());
        assert!(cavity_decay_rate(0.3, 0.5, 300e-6, SPEED_OF_LIGHT).is_err());
    }

    #[test]
    fn material_decay_rate_endpoints() {
        let p = LaserParams::default();
        let at_zero =
            material_decay_rate(0.0, p.alpha_abs, p.refractive_index, SPEED_OF_LIGHT, p.gamma_cav)
                .unwrap();
        assert!(rel_err(at_zero, 8.3278e10) < 1e-3, "at_zero = {at_zero:.4e}");
        let at_threshold =
            material_decay_rate(1.0, p.alpha_abs, p.refractive_index, SPEED_OF_LIGHT, p.gamma_cav)
                .unwrap();
        assert_eq!(at_threshold, -p.gamma_cav);
    }

    #[test]
    fn material_decay_rate_rejects_out_of_range_bias() {
        let p = LaserParams::default();
        for bad in [-0.1, 1.5] {
            assert_eq!(
                material_decay_rate(
                    bad,
                    p.alpha_abs,
                    p.refractive_index,
                    SPEED_OF_LIGHT,
                    p.gamma_cav
                ),
                Err(ModelError::BiasRange(bad))
            );
        }
    }

    #[test]
    fn total_decay_rate_at_operating_bias() {
        // With the geometric cavity rate, bias 0.7 interpolates to 7.51e10:
        // same order of magnitude as the stored device total of 1e11.
        let mut p = LaserParams::default();
        p.gamma_cav = cavity_decay_rate(0.3, 3.6, 300e-6, SPEED_OF_LIGHT).unwrap();
        let total = total_decay_rate(0.7, &p, SPEED_OF_LIGHT).unwrap();
        assert!(rel_err(total, 7.5115e10) < 1e-3, "total = {total:.4e}");
        let ratio = total / LaserParams::default().gamma_total;
        assert!(ratio > 0.1 && ratio < 10.0);
    }

    #[test]
    fn attenuation_db_examples() {
        assert_eq!(attenuation_db(1e11, 0.0).unwrap(), 0.0);
        let one_ns = attenuation_db(1e11, 1e-9).unwrap();
        assert!(rel_err(one_ns, 434.29) < 1e-3, "1 ns: {one_ns}");
        let quarter_ns = attenuation_db(1e11, 0.25e-9).unwrap();
        assert!(rel_err(quarter_ns, 108.57) < 1e-3, "0.25 ns: {quarter_ns}");
    }

    #[test]
    fn attenuation_db_is_additive_in_duration() {
        let (t1, t2) = (0.37e-9, 1.13e-9);
        let lhs = attenuation_db(1e11, t1 + t2).unwrap();
        let rhs = attenuation_db(1e11, t1).unwrap() + attenuation_db(1e11, t2).unwrap();
        assert!(rel_err(lhs, rhs) < 1e-12);
    }

    #[test]
    fn residual_coherence_bits_reference_point() {
        // 3e5 saturated photons attenuated by 100 dB leave 3e-5 photons,
        // about 15 bits below a one-photon thermal background.
        let bits = residual_coherence_bits(3e5, 100.0, 1.0).unwrap();
        assert!((bits - 15.0).abs() <= 0.1, "bits = {bits}");
        let residual = 3e5 * 10f64.powf(-10.0);
        assert!(rel_err(residual, 3e-5) < 1e-12);
    }

    #[test]
    fn residual_coherence_bits_zero_at_equal_levels() {
        // residual == n_thermal: 10 photons attenuated by 10 dB vs 1 photon.
        let bits = residual_coherence_bits(10.0, 10.0, 1.0).unwrap();
        assert!(bits.abs() < 1e-12);
    }

    #[test]
    fn residual_coherence_bits_slope_per_db() {
        let b1 = residual_coherence_bits(3e5, 90.0, 1.0).unwrap();
        let b2 = residual_coherence_bits(3e5, 100.0, 1.0).unwrap();
        let slope = (b2 - b1) / 10.0;
        assert!((slope - 1.0 / (10.0 * 2f64.log10())).abs() < 1e-9);
        assert!((slope - 0.332).abs() < 1e-3);
    }

    #[test]
    fn laser_params_defaults_validate() {
        LaserParams::default().validate().unwrap();
    }

    #[test]
    fn laser_params_validation_catches_violations() {
        let mut p = LaserParams::default();
        p.reflectivity = 1.2;
        assert!(p.validate().is_err());

        let mut p = LaserParams::default();
        p.pulse_width = 1.0 / p.prf;
        assert!(p.validate().is_err());

        let mut p = LaserParams::default();
        p.n_thermal = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn vacuum_field_has_no_photons() {
        let f = CavityField::vacuum();
        assert_eq!(f.photon_number(), 0.0);
        assert_eq!(f.t, 0.0);
    }
}
