//! Kolmogorov–Smirnov distribution tests (one- and two-sample) with
//! asymptotic critical values.
//!
//! Used throughout the test suite and the statistical battery layer to
//! compare empirical distributions against references (uniform phases,
//! interferometer output laws, p-value uniformity across substreams).

/// One-sample KS statistic `D_n = sup_x |F_n(x) − F(x)|` of `samples`
/// against the continuous CDF `cdf`.
///
/// Both one-sided gaps at each order statistic are taken, so ties and
/// discrete jumps in the empirical CDF are handled exactly.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let upper = (i as f64 + 1.0) / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    d
}

/// Asymptotic one-sample critical value at significance `alpha`:
/// `c(alpha)/sqrt(n)` with `c(alpha) = sqrt(-ln(alpha/2)/2)`.
///
/// `c(0.01) ≈ 1.6276`, `c(0.05) ≈ 1.3581`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ks_scaling(alpha) / (n as f64).sqrt()
}

/// Two-sample KS statistic `sup_x |F_a(x) − F_b(x)|` between two empirical
/// distributions, via a merge over both sorted samples.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("samples must not contain NaN"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("samples must not contain NaN"));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        if sa[i] <= sb[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample critical value at significance `alpha`:
/// `c(alpha)·sqrt((n+m)/(n·m))`.
pub fn two_sample_ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_scaling(alpha) * ((n + m) / (n * m)).sqrt()
}

fn ks_scaling(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}
