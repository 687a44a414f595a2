//! Deterministic simulation of the multiplexed AESR acquisition chain and
//! synthetic cohort / exercise-session generators.
//!
//! Every output is a pure function of its configuration and seed. Sub-draws
//! use [`crate::seed::derive`] so work can be split without changing results.

mod calibration;
mod channel;
mod cohort;
mod mux;
mod session;
mod sped;

use thiserror::Error;

pub use calibration::{calibrate, CalibrationPoint, CalibrationReport};
pub use channel::{impedance_sweep, measure_resistance, ChannelModel, TEMPERATURE_RANGE};
pub use cohort::{simulate_cohort, Archetype, Cohort, CohortConfig, EarRecord};
pub use mux::{scan_all, ActivationInterval, MuxState, SwitchEvent, DEFAULT_BREAK_US, DEFAULT_CHANNELS, DEFAULT_DWELL_US};
pub use session::{
    simulate_exercise_session, simulate_exercise_study, ExerciseResponse, PeriodRecord, SessionRecord, Subject, TestLabel,
    Variability, PERIODS,
};
pub use sped::{c4, noise_for_mean_cv, replicate_readings, sped_model, sped_readings, DEFAULT_CONTACT_FRACTION};

#[derive(Debug, Error)]
pub enum AcquisitionError {
    #[error("temperature {0} °C outside [0, 60]")]
    Temperature(f64),
    #[error("{channels} channels exceed multiplexer capacity {capacity}")]
    Capacity { channels: usize, capacity: usize },
    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
