//! Analytic sinusoidal joint trajectories.
//!
//! Every joint coordinate follows `q(t) = A sin(2π f t)` with exact
//! derivatives, so no numerical differentiation enters the pipeline.

use thiserror::Error;

use crate::composition::SubsystemStates;
use crate::model::RobotTree;
use crate::serial::ChainState;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("trajectory config invalid: {0}")]
    Invalid(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryConfig {
    /// Amplitude in rad (or m for prismatic coordinates).
    pub amplitude: f64,
    pub frequency_hz: f64,
    pub duration: f64,
    pub rate_hz: f64,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if !self.amplitude.is_finite() {
            return Err(TrajectoryError::Invalid("amplitude must be finite"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.duration) || !positive(self.rate_hz) {
            return Err(TrajectoryError::Invalid("duration and rate must be positive"));
        }
        if !self.frequency_hz.is_finite() {
            return Err(TrajectoryError::Invalid("frequency must be finite"));
        }
        Ok(())
    }

    /// Sample times `0, 1/rate, …` covering the duration inclusively.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.duration * self.rate_hz).round() as usize;
        (0..=n).map(|k| k as f64 / self.rate_hz).collect()
    }
}

/// `(q, q̇, q̈)` of one coordinate at time `t`.
pub fn coordinate_at(amplitude: f64, frequency_hz: f64, t: f64) -> (f64, f64, f64) {
    let w = 2.0 * std::f64::consts::PI * frequency_hz;
    let (s, c) = (w * t).sin_cos();
    (amplitude * s, amplitude * w * c, -amplitude * w * w * s)
}

/// Chain state with every coordinate on the same sinusoid.
pub fn chain_state_at(dof: usize, amplitude: f64, frequency_hz: f64, t: f64) -> ChainState {
    let (q, qd, qdd) = coordinate_at(amplitude, frequency_hz, t);
    ChainState::new(vec![q; dof], vec![qd; dof], vec![qdd; dof])
}

/// Per-subsystem states for all modeled subsystems of a tree.
pub fn subsystem_states_at(
    tree: &RobotTree,
    amplitude: f64,
    frequency_hz: f64,
    t: f64,
) -> SubsystemStates {
    tree.ids()
        .filter_map(|id| {
            let sub = tree.subsystem(id)?;
            if sub.is_black_box() {
                None
            } else {
                Some((id, chain_state_at(sub.dof(), amplitude, frequency_hz, t)))
            }
        })
        .collect()
}
