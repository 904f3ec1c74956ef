//! Time-domain simulation of the second-order accelerometer model
//!
//! `x'' + 2 zeta w_n x' + w_n^2 x = dc_gain * w_n^2 * a(t)`

mod integrator;
mod metrics;
mod waveform;

pub use integrator::{integrate, Trajectory};
pub use metrics::{step_metrics, step_metrics_with, RiseTimeDefinition, StepMetrics};
pub use waveform::{make_waveform, Waveform, WaveformKind};

use thiserror::Error;

use crate::device_model::DerivedParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("system is not underdamped (zeta = {zeta})")]
    NotUnderdamped { zeta: f64 },
    #[error("time step {dt} s exceeds resolution limit {limit} s (1/(50 f_n))")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("invalid time grid: dt = {dt} s, duration = {duration} s")]
    InvalidTimeGrid { dt: f64, duration: f64 },
    #[error("non-finite value at t = {time} s")]
    NonFinite { time: f64 },
    #[error("invalid waveform parameter: {0}")]
    InvalidWaveform(String),
    #[error("response does not settle inside the ±{band} band before the end of the trajectory")]
    NeverSettles { band: f64 },
    #[error("trajectory never reaches its final value")]
    NeverRises,
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Normal form of the x/a transfer function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderModel {
    pub omega_n: f64,
    pub zeta: f64,
    /// Static gain, m per m/s^2 (1/w_n^2 for displacement per acceleration).
    pub dc_gain: f64,
}

impl SecondOrderModel {
    pub fn new(omega_n: f64, zeta: f64, dc_gain: f64) -> Result<Self> {
        let model = Self {
            omega_n,
            zeta,
            dc_gain,
        };
        model.validate()?;
        Ok(model)
    }

    /// Displacement-per-acceleration model with `dc_gain = S_d`.
    pub fn from_params(params: &DerivedParams) -> Result<Self> {
        Self::new(params.omega_n, params.zeta, params.sensitivity)
    }

    pub fn with_zeta(self, zeta: f64) -> Result<Self> {
        Self::new(self.omega_n, zeta, self.dc_gain)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_n.is_finite() && self.omega_n > 0.0) {
            return Err(SimError::InvalidModel(format!(
                "omega_n = {}",
                self.omega_n
            )));
        }
        if !(self.zeta.is_finite() && self.zeta >= 0.0) {
            return Err(SimError::InvalidModel(format!("zeta = {}", self.zeta)));
        }
        if !(self.dc_gain.is_finite() && self.dc_gain > 0.0) {
            return Err(SimError::InvalidModel(format!(
                "dc_gain = {}",
                self.dc_gain
            )));
        }
        Ok(())
    }

    pub fn natural_frequency_hz(&self) -> f64 {
        self.omega_n / (2.0 * std::f64::consts::PI)
    }

    pub fn is_underdamped(&self) -> bool {
        self.zeta > 0.0 && self.zeta < 1.0
    }

    /// Damped oscillation frequency [rad/s].
    pub fn omega_d(&self) -> f64 {
        self.omega_n * (1.0 - self.zeta * self.zeta).sqrt()
    }

    /// Peak overshoot of the underdamped step response as a fraction of the final value.
    pub fn overshoot_fraction(&self) -> f64 {
        if self.zeta >= 1.0 {
            return 0.0;
        }
        (-std::f64::consts::PI * self.zeta / (1.0 - self.zeta * self.zeta).sqrt()).exp()
    }
}

/// Exact underdamped response to a step of `accel` applied at t = 0 from rest.
pub fn closed_form_step(model: &SecondOrderModel, accel: f64, t: f64) -> Result<f64> {
    if !model.is_underdamped() {
        return Err(SimError::NotUnderdamped { zeta: model.zeta });
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let root = (1.0 - model.zeta * model.zeta).sqrt();
    let wd = model.omega_n * root;
    let envelope = (-model.zeta * model.omega_n * t).exp();
    let shape = 1.0 - envelope * ((wd * t).cos() + model.zeta / root * (wd * t).sin());
    Ok(accel * model.dc_gain * shape)
}
