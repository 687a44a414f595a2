//! Repeatability models for the conformable device and a handheld probe.

use rand_distr::{Distribution, LogNormal, Normal};

use super::AcquisitionError;
use crate::seed::{self, stream};

/// Share of the true resistance attributed to the pressure-sensitive contact term.
pub const DEFAULT_CONTACT_FRACTION: f64 = 0.5;

/// Handheld-probe readings of a fixed resistance with [`DEFAULT_CONTACT_FRACTION`].
pub fn sped_model(pressure_cv: f64, readings: usize, true_r: f64, seed: u64) -> Result<Vec<f64>, AcquisitionError> {
    sped_readings(true_r, DEFAULT_CONTACT_FRACTION, pressure_cv, readings, seed)
}

/// Readings `R(1 − f) + R f L` with `L` lognormal of unit mean.
///
/// The CV of `L` is `pressure_cv / f`, which makes the CV of the readings
/// equal to `pressure_cv`.
pub fn sped_readings(
    true_r: f64,
    contact_fraction: f64,
    pressure_cv: f64,
    readings: usize,
    seed: u64,
) -> Result<Vec<f64>, AcquisitionError> {
    if !(pressure_cv >= 0.0 && pressure_cv.is_finite()) {
        return Err(AcquisitionError::InvalidArgument(format!("pressure_cv must be >= 0, got {pressure_cv}")));
    }
    if !(contact_fraction > 0.0 && contact_fraction <= 1.0) {
        return Err(AcquisitionError::InvalidArgument(format!("contact fraction must be in (0, 1], got {contact_fraction}")));
    }
    if pressure_cv == 0.0 {
        return Ok(vec![true_r; readings]);
    }
    let cv_l = pressure_cv / contact_fraction;
    let sigma = (1.0 + cv_l * cv_l).ln().sqrt();
    let factor = LogNormal::new(-sigma * sigma / 2.0, sigma).expect("finite parameters");
    let mut rng = seed::rng_for(seed, stream::SPED, 0);
    Ok((0..readings)
        .map(|_| true_r * (1.0 - contact_fraction) + true_r * contact_fraction * factor.sample(&mut rng))
        .collect())
}

/// Unbiasing constant `c4(n) = E[s] / σ` for `n` normal samples.
///
/// Uses `Γ(n/2)/Γ((n−1)/2)` via its two-step recursion from n = 2 and 3.
pub fn c4(n: usize) -> f64 {
    assert!(n >= 2, "c4 needs at least two samples");
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let (mut k, mut ratio) = if n.is_multiple_of(2) { (2usize, 1.0 / sqrt_pi) } else { (3usize, sqrt_pi / 2.0) };
    while k < n {
        ratio *= k as f64 / (k as f64 - 1.0);
        k += 2;
    }
    (2.0 / (n as f64 - 1.0)).sqrt() * ratio
}

/// Per-reading relative noise whose expected sample CV over `repeats`
/// readings equals `mean_cv`.
pub fn noise_for_mean_cv(mean_cv: f64, repeats: usize) -> f64 {
    mean_cv / c4(repeats)
}

/// Repeated readings of a conformable array: `subjects` blocks of
/// `repeats × aps` values, each reading the AP's true value times `1 + ε`.
pub fn replicate_readings(
    true_values: &[f64],
    subjects: usize,
    repeats: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>, AcquisitionError> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(AcquisitionError::InvalidArgument(format!("noise must be >= 0, got {noise_sigma}")));
    }
    let normal = Normal::new(0.0, noise_sigma).expect("validated");
    Ok((0..subjects)
        .map(|s| {
            let mut rng = seed::rng_for(seed, stream::REPLICATE, s as u64);
            (0..repeats)
                .map(|_| true_values.iter().map(|v| v * (1.0 + normal.sample(&mut rng))).collect())
                .collect()
        })
        .collect())
}
