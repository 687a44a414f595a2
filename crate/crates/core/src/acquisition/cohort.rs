//! Synthetic two-ear cohorts built from archetype AESR trends.

use rand::Rng as _;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::AcquisitionError;
use crate::analysis::{AESRMatrix, AnalysisError, Side};
use crate::seed::{self, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archetype {
    pub name: String,
    /// Relative AESR per AP; only the shape matters after normalization.
    pub trend: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    pub archetypes: Vec<Archetype>,
    /// Ears per archetype; must total an even number.
    pub sizes: Vec<usize>,
    /// Log-scale standard deviation of independent per-AP noise.
    pub noise_sigma: f64,
    /// Log-scale standard deviation of a per-ear overall gain.
    pub gain_sigma: f64,
    /// Ω.
    pub base_resistance: f64,
    /// Target share of subjects whose two ears share an archetype.
    pub concordance: f64,
}

impl Default for CohortConfig {
    /// Four illustrative 10-AP shapes with 35/17/5/3 ears.
    fn default() -> Self {
        let arch = |name: &str, trend: [f64; 10]| Archetype { name: name.into(), trend: trend.to_vec() };
        Self {
            archetypes: vec![
                arch("A", [1.0, 1.2, 1.5, 1.3, 1.1, 0.9, 1.0, 1.4, 1.6, 1.2]),
                arch("B", [1.0, 2.0, 2.6, 2.2, 1.5, 1.2, 1.8, 2.4, 2.8, 2.0]),
                arch("C", [1.0, 0.6, 0.7, 1.7, 2.5, 2.3, 0.7, 0.8, 0.9, 2.8]),
                arch("D", [1.0, 1.5, 0.5, 0.4, 0.8, 3.2, 3.6, 0.7, 0.4, 0.6]),
            ],
            sizes: vec![35, 17, 5, 3],
            noise_sigma: 0.07,
            gain_sigma: 0.3,
            base_resistance: 1.0e6,
            concordance: 0.8,
        }
    }
}

impl CohortConfig {
    pub fn validate(&self) -> Result<(), AcquisitionError> {
        let bad = |field: &str, message: String| Err(AcquisitionError::InvalidConfig { field: field.into(), message });
        if self.archetypes.is_empty() {
            return bad("archetypes", "at least one archetype is required".into());
        }
        if self.sizes.len() != self.archetypes.len() {
            return bad("sizes", format!("{} sizes for {} archetypes", self.sizes.len(), self.archetypes.len()));
        }
        if self.sizes.contains(&0) {
            return bad("sizes", "every size must be positive".into());
        }
        if self.sizes.iter().sum::<usize>() % 2 != 0 {
            return bad("sizes", "ears must pair into subjects (even total)".into());
        }
        let n = self.archetypes[0].trend.len();
        if n == 0 {
            return bad("archetypes", "trends must be non-empty".into());
        }
        for a in &self.archetypes {
            if a.trend.len() != n {
                return bad("archetypes", format!("archetype {} has {} APs, expected {n}", a.name, a.trend.len()));
            }
            if a.trend.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad("archetypes", format!("archetype {} has a non-positive value", a.name));
            }
        }
        for (field, v) in [("noise_sigma", self.noise_sigma), ("gain_sigma", self.gain_sigma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(field, format!("must be >= 0, got {v}"));
            }
        }
        if !(self.base_resistance > 0.0 && self.base_resistance.is_finite()) {
            return bad("base_resistance", format!("must be > 0, got {}", self.base_resistance));
        }
        if !(0.0..=1.0).contains(&self.concordance) {
            return bad("concordance", format!("must be in [0, 1], got {}", self.concordance));
        }
        Ok(())
    }

    pub fn n_aps(&self) -> usize {
        self.archetypes.first().map_or(0, |a| a.trend.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarRecord {
    /// 1-based.
    pub subject: usize,
    pub side: Side,
    pub archetype: usize,
    pub values: Vec<f64>,
}

impl EarRecord {
    pub fn label(&self) -> String {
        format!("S{:02}-{}", self.subject, self.side.suffix())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    /// Ordered by subject, left ear first.
    pub ears: Vec<EarRecord>,
}

impl Cohort {
    pub fn to_matrix(&self) -> Result<AESRMatrix, AnalysisError> {
        let labels = self.ears.iter().map(EarRecord::label).collect();
        let rows: Vec<Vec<f64>> = self.ears.iter().map(|e| e.values.clone()).collect();
        AESRMatrix::from_rows(labels, &rows)
    }

    pub fn truth(&self) -> Vec<usize> {
        self.ears.iter().map(|e| e.archetype).collect()
    }

    /// Share of subjects whose ears come from one archetype.
    pub fn true_concordance(&self) -> f64 {
        let pairs = self.ears.chunks(2);
        let n = pairs.len();
        pairs.filter(|p| p[0].archetype == p[1].archetype).count() as f64 / n as f64
    }
}

/// Generate one cohort.
///
/// Ears sorted by archetype are paired consecutively, which maximises the
/// number of same-archetype subjects. Pairs `(a,a),(b,b)` with `a ≠ b` are then
/// swapped to `(a,b),(a,b)` at random until the count of concordant subjects
/// is as close as parity allows to `round(concordance × subjects)`. Subject
/// order and sides are shuffled; ear `e` draws its noise from
/// `derive(seed, COHORT_EAR, e)`.
pub fn simulate_cohort(config: &CohortConfig, seed: u64) -> Result<Cohort, AcquisitionError> {
    config.validate()?;
    let mut rng = seed::rng_for(seed, stream::COHORT_PAIRING, 0);

    let sorted: Vec<usize> = config.sizes.iter().enumerate().flat_map(|(a, &s)| std::iter::repeat_n(a, s)).collect();
    let mut pairs: Vec<[usize; 2]> = sorted.chunks(2).map(|c| [c[0], c[1]]).collect();
    let subjects = pairs.len();
    let target = (config.concordance * subjects as f64).round() as usize;
    loop {
        let concordant: Vec<usize> = (0..subjects).filter(|&i| pairs[i][0] == pairs[i][1]).collect();
        if concordant.len() < target + 2 {
            break;
        }
        let options: Vec<(usize, usize)> = concordant
            .iter()
            .enumerate()
            .flat_map(|(x, &i)| concordant[x + 1..].iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| pairs[i][0] != pairs[j][0])
            .collect();
        if options.is_empty() {
            log::warn!("cannot lower concordance below {} of {subjects} subjects", concordant.len());
            break;
        }
        let (i, j) = options[rng.random_range(0..options.len())];
        let moved = pairs[i][1];
        pairs[i][1] = pairs[j][1];
        pairs[j][1] = moved;
    }
    // Fisher-Yates over subjects, then a coin flip for which ear is left.
    for i in (1..subjects).rev() {
        pairs.swap(i, rng.random_range(0..=i));
    }
    for p in pairs.iter_mut() {
        if rng.random::<bool>() {
            p.swap(0, 1);
        }
    }

    let noise = LogNormal::new(0.0, config.noise_sigma).expect("validated");
    let gain = LogNormal::new(0.0, config.gain_sigma).expect("validated");
    let mut ears = Vec::with_capacity(2 * subjects);
    for (s, pair) in pairs.iter().enumerate() {
        for (k, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let index = 2 * s + k;
            let mut ear_rng = seed::rng_for(seed, stream::COHORT_EAR, index as u64);
            let archetype = pair[k];
            let g = if config.gain_sigma > 0.0 { gain.sample(&mut ear_rng) } else { 1.0 };
            let values = config.archetypes[archetype]
                .trend
                .iter()
                .map(|t| {
                    let e = if config.noise_sigma > 0.0 { noise.sample(&mut ear_rng) } else { 1.0 };
                    config.base_resistance * g * t * e
                })
                .collect();
            ears.push(EarRecord { subject: s + 1, side, archetype, values });
        }
    }
    Ok(Cohort { ears })
}
