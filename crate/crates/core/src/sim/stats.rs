//! Binomial confidence helpers for comparing error counts.

use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Wilson score interval for `errors` out of `trials` at two-sided
/// confidence `level`.
pub fn wilson_interval(errors: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = std_normal().inverse_cdf(0.5 + level / 2.0);
    let n = trials as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// One-sided p-value of the pooled two-proportion z-test for
/// "rate A is lower than rate B".
pub fn p_value_lower(errors_a: u64, trials_a: u64, errors_b: u64, trials_b: u64) -> f64 {
    let (na, nb) = (trials_a as f64, trials_b as f64);
    let (pa, pb) = (errors_a as f64 / na, errors_b as f64 / nb);
    let pooled = (errors_a + errors_b) as f64 / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    if se == 0.0 {
        return if pa < pb { 0.0 } else { 1.0 };
    }
    1.0 - std_normal().cdf((pb - pa) / se)
}

/// Whether rate A is below rate B at one-sided `confidence`.
pub fn significantly_lower(errors_a: u64, trials_a: u64, errors_b: u64, trials_b: u64, confidence: f64) -> bool {
    p_value_lower(errors_a, trials_a, errors_b, trials_b) < 1.0 - confidence
}
