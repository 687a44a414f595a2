use serde::{Deserialize, Serialize};

use super::{measure_resistance, AcquisitionError, ChannelModel};
use crate::seed::{self, stream};

pub const DEFAULT_CHANNELS: usize = 16;
/// Default time each channel stays connected during a scan (µs).
pub const DEFAULT_DWELL_US: u64 = 5_000;
/// Dead time between opening one switch and closing the next (µs).
pub const DEFAULT_BREAK_US: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub time_us: u64,
    pub channel: usize,
    pub on: bool,
}

/// Closed-open activation interval `[start_us, end_us)` of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActivationInterval {
    pub channel: usize,
    pub start_us: u64,
    pub end_us: u64,
}

/// Break-before-make analog multiplexer.
///
/// Time is an integer microsecond clock owned by the state machine, so the
/// switch log is exact and reproducible.
#[derive(Debug, Clone)]
pub struct MuxState {
    channel_count: usize,
    dwell_us: u64,
    break_us: u64,
    clock_us: u64,
    active: Option<usize>,
    log: Vec<SwitchEvent>,
}

impl Default for MuxState {
    fn default() -> Self {
        Self::new(DEFAULT_CHANNELS, DEFAULT_DWELL_US)
    }
}

impl MuxState {
    pub fn new(channel_count: usize, dwell_us: u64) -> Self {
        Self { channel_count, dwell_us, break_us: DEFAULT_BREAK_US, clock_us: 0, active: None, log: Vec::new() }
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn dwell_us(&self) -> u64 {
        self.dwell_us
    }

    pub fn active(&self) -> Option<usize> {
        self.active
    }

    pub fn now_us(&self) -> u64 {
        self.clock_us
    }

    pub fn log(&self) -> &[SwitchEvent] {
        &self.log
    }

    /// Connect `channel`, first disconnecting whatever is active.
    pub fn activate(&mut self, channel: usize) -> Result<(), AcquisitionError> {
        if channel >= self.channel_count {
            return Err(AcquisitionError::Capacity { channels: channel + 1, capacity: self.channel_count });
        }
        if self.active == Some(channel) {
            return Ok(());
        }
        if self.active.is_some() {
            self.deactivate();
            self.clock_us += self.break_us;
        }
        self.log.push(SwitchEvent { time_us: self.clock_us, channel, on: true });
        self.active = Some(channel);
        Ok(())
    }

    pub fn deactivate(&mut self) {
        if let Some(ch) = self.active.take() {
            self.log.push(SwitchEvent { time_us: self.clock_us, channel: ch, on: false });
        }
    }

    pub fn advance(&mut self, dt_us: u64) {
        self.clock_us += dt_us;
    }

    /// Activation intervals reconstructed from the log; a still-active
    /// channel ends at the current clock.
    pub fn intervals(&self) -> Vec<ActivationInterval> {
        let mut out = Vec::new();
        let mut open: Option<(usize, u64)> = None;
        for e in &self.log {
            match (e.on, open) {
                (true, _) => open = Some((e.channel, e.time_us)),
                (false, Some((ch, start))) if ch == e.channel => {
                    out.push(ActivationInterval { channel: ch, start_us: start, end_us: e.time_us });
                    open = None;
                }
                _ => {}
            }
        }
        if let Some((ch, start)) = open {
            out.push(ActivationInterval { channel: ch, start_us: start, end_us: self.clock_us });
        }
        out
    }
}

/// Read every channel in order, each while it alone is connected.
///
/// Channel `i` draws its noise from `derive(seed, CHANNEL, i)`, so the
/// readings do not depend on scan order or on other channels.
pub fn scan_all(
    mux: &mut MuxState,
    channels: &[ChannelModel],
    temperature: f64,
    seed: u64,
) -> Result<Vec<f64>, AcquisitionError> {
    if channels.len() > mux.channel_count {
        return Err(AcquisitionError::Capacity { channels: channels.len(), capacity: mux.channel_count });
    }
    let mut readings = Vec::with_capacity(channels.len());
    for (i, ch) in channels.iter().enumerate() {
        mux.activate(i)?;
        readings.push(measure_resistance(ch, temperature, seed::derive(seed, stream::CHANNEL, i as u64))?);
        mux.advance(mux.dwell_us);
    }
    mux.deactivate();
    Ok(readings)
}
