//! Seedable random-source plumbing.
//!
//! All randomness used by the simulation flows through generators created
//! here from explicit 64-bit seeds. Distinct logical streams (pulse train,
//! detector noise, calibration, …) are derived from one base seed via
//! [`substream`], so adding draws to one stage never perturbs another.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// The simulation's random number generator: deterministic, seedable, and
/// platform-independent.
pub type SimRng = ChaCha12Rng;

/// Create a generator from a bare 64-bit seed.
pub fn from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Derive an independent generator for logical stream `tag` of a run seeded
/// with `seed`. Uses a 64-bit finalizer with full avalanche, so nearby seeds
/// and tags yield unrelated streams.
pub fn substream(seed: u64, tag: u64) -> SimRng {
    from_seed(mix64(seed ^ mix64(tag)))
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One standard normal draw.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Circularly-symmetric complex standard normal: independent `N(0, 1)` real
/// and imaginary parts (real part drawn first).
pub fn complex_standard_normal(rng: &mut impl Rng) -> Complex64 {
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    Complex64::new(re, im)
}
