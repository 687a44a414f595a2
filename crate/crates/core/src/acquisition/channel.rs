use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::AcquisitionError;
use crate::seed;

/// Valid ambient temperature range for a reading (°C).
pub const TEMPERATURE_RANGE: (f64, f64) = (0.0, 60.0);

/// Electrical model of one electrode channel.
///
/// DC resistance is the series sum of skin, contact and body/lead terms plus
/// a linear temperature drift. For impedance sweeps the skin and contact terms
/// act as one resistor in parallel with the skin capacitance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelModel {
    pub r_skin: f64,
    pub r_contact: f64,
    pub r_series: f64,
    /// Ω per °C.
    pub alpha: f64,
    pub t_ref: f64,
    /// Relative standard deviation of the multiplicative reading noise.
    pub noise_sigma: f64,
    /// Farads.
    pub capacitance: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            r_skin: 900_000.0,
            r_contact: 80_000.0,
            r_series: 20_000.0,
            alpha: 2.6,
            t_ref: 25.0,
            noise_sigma: 0.0,
            capacitance: 10e-9,
        }
    }
}

impl ChannelModel {
    /// A noiseless channel whose whole resistance sits in the skin term.
    pub fn resistor(ohms: f64) -> Self {
        Self { r_skin: ohms, r_contact: 0.0, r_series: 0.0, ..Self::default() }
    }

    pub fn total(&self) -> f64 {
        self.r_skin + self.r_contact + self.r_series
    }

    pub fn validate(&self) -> Result<(), AcquisitionError> {
        let fields = [
            ("r_skin", self.r_skin),
            ("r_contact", self.r_contact),
            ("r_series", self.r_series),
            ("noise_sigma", self.noise_sigma),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(AcquisitionError::InvalidConfig { field: name.into(), message: format!("must be >= 0, got {v}") });
            }
        }
        if !(self.capacitance > 0.0 && self.capacitance.is_finite()) {
            return Err(AcquisitionError::InvalidConfig {
                field: "capacitance".into(),
                message: format!("must be > 0, got {}", self.capacitance),
            });
        }
        if !self.alpha.is_finite() || !self.t_ref.is_finite() {
            return Err(AcquisitionError::InvalidConfig { field: "alpha/t_ref".into(), message: "must be finite".into() });
        }
        Ok(())
    }
}

/// One simulated DC reading: `(R_skin + R_contact + R_series + α(T − T_ref))(1 + ε)`.
pub fn measure_resistance(channel: &ChannelModel, temperature: f64, seed: u64) -> Result<f64, AcquisitionError> {
    let (lo, hi) = TEMPERATURE_RANGE;
    if !(lo..=hi).contains(&temperature) {
        return Err(AcquisitionError::Temperature(temperature));
    }
    channel.validate()?;
    let clean = channel.total() + channel.alpha * (temperature - channel.t_ref);
    if channel.noise_sigma == 0.0 {
        return Ok(clean);
    }
    let eps = Normal::new(0.0, channel.noise_sigma).expect("sigma validated").sample(&mut seed::rng(seed));
    Ok(clean * (1.0 + eps))
}

/// |Z| over `n_points` log-spaced frequencies; both endpoints are hit exactly.
pub fn impedance_sweep(
    channel: &ChannelModel,
    f_min: f64,
    f_max: f64,
    n_points: usize,
) -> Result<Vec<(f64, f64)>, AcquisitionError> {
    if !(f_min > 0.0 && f_max > f_min && f_max.is_finite()) {
        return Err(AcquisitionError::InvalidArgument(format!("need 0 < f_min < f_max, got {f_min}..{f_max}")));
    }
    if n_points < 2 {
        return Err(AcquisitionError::InvalidArgument("n_points must be at least 2".into()));
    }
    channel.validate()?;
    let rp = channel.r_skin + channel.r_contact;
    let (l0, l1) = (f_min.ln(), f_max.ln());
    let last = n_points - 1;
    Ok((0..n_points)
        .map(|i| {
            let f = match i {
                0 => f_min,
                i if i == last => f_max,
                i => (l0 + (l1 - l0) * i as f64 / last as f64).exp(),
            };
            let wrc = 2.0 * std::f64::consts::PI * f * rp * channel.capacitance;
            (f, channel.r_series + rp / (1.0 + wrc * wrc).sqrt())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn megohm() -> ChannelModel {
        ChannelModel { r_skin: 900_000.0, r_contact: 80_000.0, r_series: 20_000.0, noise_sigma: 0.0, ..Default::default() }
    }

    #[test]
    fn reference_temperature_is_exact() {
        assert_eq!(measure_resistance(&megohm(), 25.0, 1).unwrap(), 1_000_000.0);
        assert_eq!(measure_resistance(&megohm(), 35.0, 1).unwrap(), 1_000_026.0);
    }

    #[test]
    fn same_seed_same_reading() {
        let ch = ChannelModel { noise_sigma: 0.02, ..megohm() };
        let a = measure_resistance(&ch, 30.0, 99).unwrap();
        assert_eq!(a.to_bits(), measure_resistance(&ch, 30.0, 99).unwrap().to_bits());
        assert_ne!(a, measure_resistance(&ch, 30.0, 100).unwrap());
    }

    #[test]
    fn temperature_out_of_range() {
        assert!(matches!(measure_resistance(&megohm(), 61.0, 0), Err(AcquisitionError::Temperature(_))));
        assert!(matches!(measure_resistance(&megohm(), -0.5, 0), Err(AcquisitionError::Temperature(_))));
    }

    #[test]
    fn sweep_endpoints_and_monotone() {
        let s = impedance_sweep(&megohm(), 4.0, 4000.0, 25).unwrap();
        assert_eq!(s.first().unwrap().0, 4.0);
        assert_eq!(s.last().unwrap().0, 4000.0);
        assert!(s.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 > w[0].0));
    }

    #[test]
    fn negligible_capacitance_is_resistive() {
        let ch = ChannelModel { capacitance: 1e-15, ..megohm() };
        for (_, z) in impedance_sweep(&ch, 4.0, 4000.0, 10).unwrap() {
            assert!((z - 1_000_000.0).abs() / 1_000_000.0 < 1e-4);
        }
    }
}
