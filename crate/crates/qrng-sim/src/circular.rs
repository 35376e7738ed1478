//! Circular (directional) statistics for phase sequences.
//!
//! Phases live on the circle, so ordinary Pearson correlation is meaningless
//! for them: adding a constant offset or crossing the 0/2π seam would change
//! the answer. The Fisher–Lee circular correlation coefficient used here is
//! invariant under independent rotations of either sequence.

use thiserror::Error;

/// Errors from circular-statistics computations.
#[derive(Debug, Error, PartialEq)]
pub enum CircularError {
    #[error("sequences have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("degenerate input: all deviations from the circular mean vanish")]
    Degenerate,
}

/// Circular mean direction `atan2(Σ sin θ, Σ cos θ)` of a phase sample,
/// in `(-π, π]`.
pub fn circular_mean(phases: &[f64]) -> Result<f64, CircularError> {
    if phases.is_empty() {
        return Err(CircularError::TooShort { needed: 1, got: 0 });
    }
    let (sin_sum, cos_sum) = phases
        .iter()
        .fold((0.0, 0.0), |(s, c), &p| (s + p.sin(), c + p.cos()));
    Ok(sin_sum.atan2(cos_sum))
}

/// Fisher–Lee circular correlation between two equally long phase sequences:
///
/// ```text
/// r = Σ sin(a_i − ā)·sin(b_i − b̄)
///     ───────────────────────────────────────────
///     sqrt( Σ sin²(a_i − ā) · Σ sin²(b_i − b̄) )
/// ```
///
/// where `ā`, `b̄` are the circular means. `r` is in `[-1, 1]`, equals 1 when
/// `b = a + const`, and is invariant under rotating either sequence.
pub fn fisher_lee_correlation(a: &[f64], b: &[f64]) -> Result<f64, CircularError> {
    if a.len() != b.len() {
        return Err(CircularError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(CircularError::TooShort {
            needed: 2,
            got: a.len(),
        });
    }
    let mean_a = circular_mean(a)?;
    let mean_b = circular_mean(b)?;
    let mut cross = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let sa = (x - mean_a).sin();
        let sb = (y - mean_b).sin();
        cross += sa * sb;
        var_a += sa * sa;
        var_b += sb * sb;
    }
    let denom = (var_a * var_b).sqrt();
    if denom == 0.0 {
        return Err(CircularError::Degenerate);
    }
    Ok(cross / denom)
}

/// Fisher–Lee correlation between a phase sequence and itself shifted by one
/// position — the lag-1 serial dependence of successive phases.
pub fn successive_phase_correlation(phases: &[f64]) -> Result<f64, CircularError> {
    if phases.len() < 3 {
        return Err(CircularError::TooShort {
            needed: 3,
            got: phases.len(),
        });
    }
    fisher_lee_correlation(&phases[..phases.len() - 1], &phases[1..])
}
