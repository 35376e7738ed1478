//! Command-line driver library for the phase-diffusion QRNG simulation.
//!
//! Three layers sit between the physics library and the `qrng` binary:
//!
//! - [`config`] — defaults, the flat `key = value` configuration format,
//!   cross-module consistency checks, and the configuration hash stamped
//!   into every artifact;
//! - [`files`] — versioned little-endian binary formats for record
//!   batches and bitstreams, plus CSV emitters for plot data;
//! - [`pipeline`] — deterministic stage wiring (simulate → digitize →
//!   analyze → extract → test) with tagged randomness substreams, and the
//!   end-of-run report.
//!
//! Everything here is deterministic in (config, seed): two runs with the
//! same inputs produce byte-identical artifacts.

pub mod config;
pub mod files;
pub mod pipeline;
