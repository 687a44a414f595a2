//! Four-period exercise sessions: baseline, just after cycling, mid recovery,
//! and full recovery.

use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::AcquisitionError;
use crate::seed::{self, stream};

pub const PERIODS: [&str; 4] = ["I", "II", "III", "IV"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TestLabel {
    A1,
    A2,
    A3,
    B1,
    B2,
}

impl TestLabel {
    pub const ALL: [TestLabel; 5] = [TestLabel::A1, TestLabel::A2, TestLabel::A3, TestLabel::B1, TestLabel::B2];

    /// Cycling tests are `A*`; `B*` are controls.
    pub fn is_cycling(self) -> bool {
        matches!(self, TestLabel::A1 | TestLabel::A2 | TestLabel::A3)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        ["A1", "A2", "A3", "B1", "B2"][self as usize]
    }
}

/// Test-to-test and subject-to-subject spread of the exercise response.
///
/// Each cycling test has an intensity factor `z = √w·z_subject + √(1−w)·z_test`.
/// Active-AP drops use exponent `exp(c_aesr (ρ_aesr z + √(1−ρ_aesr²) e))` on
/// the nominal multiplier; the HR and BP rises are scaled by
/// `exp(c u − c²/2)` with `u = ρ z + √(1−ρ²) e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Variability {
    /// `w`: share of intensity variance that is fixed per subject.
    pub subject_share: f64,
    pub aesr_scale: f64,
    pub hr_scale: f64,
    pub bp_scale: f64,
    pub aesr_coupling: f64,
    pub hr_coupling: f64,
    pub bp_coupling: f64,
}

impl Variability {
    pub fn none() -> Self {
        Self { subject_share: 0.0, aesr_scale: 0.0, hr_scale: 0.0, bp_scale: 0.0, aesr_coupling: 0.0, hr_coupling: 0.0, bp_coupling: 0.0 }
    }
}

impl Default for Variability {
    fn default() -> Self {
        Self {
            subject_share: 0.9,
            aesr_scale: 0.2,
            hr_scale: 0.3,
            bp_scale: 0.3,
            aesr_coupling: 0.78,
            hr_coupling: 0.78,
            bp_coupling: 0.62,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExerciseResponse {
    pub n_aps: usize,
    /// Period-II multipliers of the leading (active) APs.
    pub active_drop: Vec<f64>,
    /// Remaining APs draw their period-II multiplier from `[inactive_drop_min, 1]`.
    pub inactive_drop_min: f64,
    /// Mean period-III multiplier over the active APs.
    pub recovery: f64,
    pub hr_gain: f64,
    pub bp_gain: f64,
    /// bpm.
    pub baseline_hr: f64,
    /// mmHg.
    pub baseline_bp: f64,
    /// Ω.
    pub baseline_resistance: f64,
    /// Log-scale spread of baseline resistance across APs.
    pub baseline_spread: f64,
    /// Relative standard deviation of each reading.
    pub noise_sigma: f64,
    pub variability: Variability,
}

impl Default for ExerciseResponse {
    fn default() -> Self {
        Self {
            n_aps: 13,
            active_drop: vec![0.392, 0.332, 0.446, 0.351, 0.422, 0.487],
            inactive_drop_min: 0.765,
            recovery: 0.677,
            hr_gain: 1.429,
            bp_gain: 1.16,
            baseline_hr: 72.0,
            baseline_bp: 118.0,
            baseline_resistance: 1.0e6,
            baseline_spread: 0.3,
            noise_sigma: 0.02,
            variability: Variability::default(),
        }
    }
}

impl ExerciseResponse {
    /// Nominal response with every random spread switched off.
    pub fn noiseless() -> Self {
        Self { noise_sigma: 0.0, variability: Variability::none(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), AcquisitionError> {
        let bad = |field: &str, message: String| Err(AcquisitionError::InvalidConfig { field: field.into(), message });
        if self.n_aps == 0 || self.active_drop.len() > self.n_aps {
            return bad("active_drop", format!("{} active APs for {} APs", self.active_drop.len(), self.n_aps));
        }
        if self.active_drop.iter().any(|m| !(*m > 0.0 && *m <= 1.0)) {
            return bad("active_drop", "multipliers must lie in (0, 1]".into());
        }
        if !(self.inactive_drop_min > 0.0 && self.inactive_drop_min <= 1.0) {
            return bad("inactive_drop_min", format!("must lie in (0, 1], got {}", self.inactive_drop_min));
        }
        let mean = self.active_mean();
        if !self.active_drop.is_empty() && !(self.recovery >= mean && self.recovery <= 1.0) {
            return bad("recovery", format!("must lie in [{mean:.3}, 1], got {}", self.recovery));
        }
        for (field, v) in [
            ("hr_gain", self.hr_gain),
            ("bp_gain", self.bp_gain),
            ("baseline_hr", self.baseline_hr),
            ("baseline_bp", self.baseline_bp),
            ("baseline_resistance", self.baseline_resistance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, format!("must be > 0, got {v}"));
            }
        }
        for (field, v) in [
            ("baseline_spread", self.baseline_spread),
            ("noise_sigma", self.noise_sigma),
            ("variability.aesr_scale", self.variability.aesr_scale),
            ("variability.hr_scale", self.variability.hr_scale),
            ("variability.bp_scale", self.variability.bp_scale),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(field, format!("must be >= 0, got {v}"));
            }
        }
        let v = &self.variability;
        for (field, x) in [
            ("variability.subject_share", v.subject_share),
            ("variability.aesr_coupling", v.aesr_coupling.abs()),
            ("variability.hr_coupling", v.hr_coupling.abs()),
            ("variability.bp_coupling", v.bp_coupling.abs()),
        ] {
            if !(0.0..=1.0).contains(&x) {
                return bad(field, format!("must lie in [0, 1], got {x}"));
            }
        }
        Ok(())
    }

    fn active_mean(&self) -> f64 {
        if self.active_drop.is_empty() {
            return 1.0;
        }
        self.active_drop.iter().sum::<f64>() / self.active_drop.len() as f64
    }

    /// Fraction `ρ` of the period-II deficit recovered by period III, chosen
    /// so the nominal active multipliers average `recovery` in period III.
    pub fn recovery_fraction(&self) -> f64 {
        let m = self.active_mean();
        if m >= 1.0 {
            1.0
        } else {
            (self.recovery - m) / (1.0 - m)
        }
    }
}

/// Per-volunteer quantities that stay fixed across tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub id: usize,
    /// Ω per AP.
    pub baseline: Vec<f64>,
    /// Nominal period-II multiplier per AP.
    pub drop: Vec<f64>,
    pub hr: f64,
    pub bp: f64,
    /// Standard-normal subject intensity factor.
    pub latent: f64,
}

impl Subject {
    pub fn draw(response: &ExerciseResponse, id: usize, seed: u64) -> Result<Self, AcquisitionError> {
        response.validate()?;
        let mut rng = seed::rng_for(seed, stream::SUBJECT, id as u64);
        let spread = LogNormal::new(0.0, response.baseline_spread).expect("validated");
        let baseline = (0..response.n_aps)
            .map(|_| response.baseline_resistance * if response.baseline_spread > 0.0 { spread.sample(&mut rng) } else { 1.0 })
            .collect();
        let drop = (0..response.n_aps)
            .map(|j| match response.active_drop.get(j) {
                Some(&m) => m,
                None => rng.random_range(response.inactive_drop_min..=1.0),
            })
            .collect();
        let latent: f64 = StandardNormal.sample(&mut rng);
        Ok(Self { id, baseline, drop, hr: response.baseline_hr, bp: response.baseline_bp, latent })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub subject: usize,
    pub test: TestLabel,
    /// Periods I–IV, Ω per AP.
    pub aesr: [Vec<f64>; 4],
    pub hr: [f64; 4],
    pub bp: [f64; 4],
}

/// Flat per-period form used for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub subject: usize,
    pub test: TestLabel,
    pub period: String,
    pub aesr: Vec<f64>,
    pub hr: f64,
    pub bp: f64,
}

impl SessionRecord {
    pub fn period_records(&self) -> Vec<PeriodRecord> {
        (0..4)
            .map(|p| PeriodRecord {
                subject: self.subject,
                test: self.test,
                period: PERIODS[p].to_string(),
                aesr: self.aesr[p].clone(),
                hr: self.hr[p],
                bp: self.bp[p],
            })
            .collect()
    }

    /// `"<subject>-<test>-<period>"`.
    pub fn label(&self, period: usize) -> String {
        format!("{}-{}-{}", self.subject, self.test.as_str(), PERIODS[period])
    }
}

/// One test for one subject; the draw uses `derive(seed, SESSION, 8·id + test)`.
pub fn simulate_exercise_session(
    response: &ExerciseResponse,
    subject: &Subject,
    test: TestLabel,
    seed: u64,
) -> Result<SessionRecord, AcquisitionError> {
    response.validate()?;
    if subject.baseline.len() != response.n_aps || subject.drop.len() != response.n_aps {
        return Err(AcquisitionError::InvalidArgument(format!("subject {} does not have {} APs", subject.id, response.n_aps)));
    }
    let mut rng = seed::rng_for(seed, stream::SESSION, (subject.id as u64) * 8 + test.index() as u64);
    let n = response.n_aps;
    let n_active = response.active_drop.len();
    let v = &response.variability;
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };

    let (m2, hr_rise, bp_rise) = if test.is_cycling() {
        let z = v.subject_share.sqrt() * subject.latent + (1.0 - v.subject_share).sqrt() * gauss();
        let m2: Vec<f64> = (0..n)
            .map(|j| {
                let e = gauss();
                let u = if j < n_active { v.aesr_coupling * z + (1.0 - v.aesr_coupling.powi(2)).sqrt() * e } else { e };
                subject.drop[j].powf((v.aesr_scale * u).exp())
            })
            .collect();
        let rise = |gain: f64, scale: f64, coupling: f64, e: f64| {
            let u = coupling * z + (1.0 - coupling * coupling).sqrt() * e;
            (gain - 1.0) * (scale * u - scale * scale / 2.0).exp()
        };
        let (eh, eb) = (gauss(), gauss());
        (m2, rise(response.hr_gain, v.hr_scale, v.hr_coupling, eh), rise(response.bp_gain, v.bp_scale, v.bp_coupling, eb))
    } else {
        (vec![1.0; n], 0.0, 0.0)
    };
    let rho = response.recovery_fraction();
    let m3: Vec<f64> = m2.iter().map(|m| m + rho * (1.0 - m)).collect();
    let ones = vec![1.0; n];

    let noise = Normal::new(0.0, response.noise_sigma).expect("validated");
    let mut read = |mult: &[f64]| -> Vec<f64> {
        subject
            .baseline
            .iter()
            .zip(mult)
            .map(|(b, m)| {
                let eps = if response.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                b * m * (1.0 + eps)
            })
            .collect()
    };
    let aesr = [read(&ones), read(&m2), read(&m3), read(&ones)];
    let hr = [subject.hr, subject.hr * (1.0 + hr_rise), subject.hr * (1.0 + hr_rise * (1.0 - rho)), subject.hr];
    let bp = [subject.bp, subject.bp * (1.0 + bp_rise), subject.bp * (1.0 + bp_rise * (1.0 - rho)), subject.bp];
    Ok(SessionRecord { subject: subject.id, test, aesr, hr, bp })
}

/// Every test in `tests` for volunteers `1..=volunteers`.
pub fn simulate_exercise_study(
    response: &ExerciseResponse,
    volunteers: usize,
    tests: &[TestLabel],
    seed: u64,
) -> Result<Vec<SessionRecord>, AcquisitionError> {
    let mut out = Vec::with_capacity(volunteers * tests.len());
    for id in 1..=volunteers {
        let subject = Subject::draw(response, id, seed)?;
        for &t in tests {
            out.push(simulate_exercise_session(response, &subject, t, seed)?);
        }
    }
    Ok(out)
}
