//! Desk-scale simulation of a phase-diffusion quantum random number
//! generator, end to end.
//!
//! The physical chain is simulated stage by stage:
//!
//! 1. [`laser`] — a gain-switched laser cavity. Below threshold the
//!    intracavity field is a damped, noise-driven complex amplitude that
//!    relaxes to a thermal state with a uniformly random phase; switching the
//!    gain high amplifies that field to saturation, so every emitted pulse
//!    carries a fresh random optical phase.
//! 2. [`mzi`] — an unbalanced Mach–Zehnder interferometer whose long arm
//!    delays one pulse period. Interference of each pulse with its successor
//!    converts the random phase differences into random pulse energies.
//! 3. [`detection`] — photodiode, bandwidth limit, AC-coupling highpass, and
//!    a sampling 12-bit digitizer that integrates each pulse into one code,
//!    with injectable classical noise and a calibration pass that freezes the
//!    digitizer range and the classical-noise floor.
//! 4. [`entropy`] and [`autocorr`] — histogram (Shannon) entropy over `2^b`
//!    bins, classical-noise subtraction, and circular autocorrelation.
//! 5. [`extractor`] and [`whirlpool`] — block hashing of the raw bit stream
//!    through the Whirlpool digest to strip the classical-noise information
//!    content.
//! 6. [`stattests`] — a small NIST-SP-800-22-style randomness test battery
//!    for raw and extracted streams.
//!
//! Every stochastic operation draws from an injected, seedable generator (see
//! [`rng`]); the crate never consumes ambient system entropy, so identical
//! seeds reproduce identical results byte for byte.

pub mod autocorr;
pub mod bitstream;
pub mod circular;
pub mod detection;
pub mod entropy;
pub mod extractor;
pub mod ks;
pub mod laser;
pub mod model;
pub mod mzi;
pub mod rng;
pub mod stattests;
pub mod whirlpool;
