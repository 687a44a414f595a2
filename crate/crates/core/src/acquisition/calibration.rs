use serde::{Deserialize, Serialize};

use super::{measure_resistance, AcquisitionError, ChannelModel};
use crate::seed::{self, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub reference: f64,
    pub measured: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub points: Vec<CalibrationPoint>,
    /// Largest |measured − true| / true; zero for an empty report.
    pub max_error: f64,
}

/// Simulate reading each reference resistor at the reference temperature.
pub fn calibrate(references: &[f64], noise_sigma: f64, seed: u64) -> Result<CalibrationReport, AcquisitionError> {
    if references.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(AcquisitionError::InvalidArgument("reference resistances must be positive".into()));
    }
    if references.windows(2).any(|w| w[1] < w[0]) {
        return Err(AcquisitionError::InvalidArgument("reference resistances must be sorted".into()));
    }
    let mut points = Vec::with_capacity(references.len());
    for (i, &reference) in references.iter().enumerate() {
        let ch = ChannelModel { noise_sigma, ..ChannelModel::resistor(reference) };
        let measured = measure_resistance(&ch, ch.t_ref, seed::derive(seed, stream::CALIBRATION, i as u64))?;
        points.push(CalibrationPoint { reference, measured, relative_error: (measured - reference).abs() / reference });
    }
    let max_error = points.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    Ok(CalibrationReport { points, max_error })
}
