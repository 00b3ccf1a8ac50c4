//! Classic sliding-mode voltage controller.
//!
//! The controller works in the error coordinates of [`crate::plant`]: it
//! drives the state onto the sliding surface
//!
//! ```text
//!   s = c * x1 + x2
//! ```
//!
//! and keeps it there, after which the voltage error decays as exp(-c*t).
//! The duty command is the sum of an equivalent term, which cancels the
//! modelled dynamics on the surface, and a switching term, which enforces
//! the reaching condition s * ds/dt <= 0. The duty input enters the
//! error-rate equation with gain -V_in/(L*C); with that sign, holding
//! ds/dt = -eta * sw(s) requires
//!
//! ```text
//!   duty = (L*C/V_in) * [c*x2 - x1/(L*C) - x2/(R*C) + V_ref/(L*C) + eta*sw(s)]
//! ```
//!
//! where sw is the sign function, optionally smoothed inside a boundary
//! layer of width `phi` to trade steady-state chattering against stiffness
//! of the response.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{ConverterParams, ErrorState};

/// Sliding-mode controller gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmcConfig {
    /// Surface slope c (1/s): error decay rate while sliding.
    pub surface_slope: f64,
    /// Switching gain eta (V/s^2): reaching rate, must exceed the lumped
    /// disturbance and model-error bound.
    pub switching_gain: f64,
    /// Boundary-layer half width phi (V/s); 0 selects the discontinuous
    /// sign function.
    pub boundary_layer: f64,
    /// Declared bound on the additive disturbance (V/s^2).
    pub disturbance_bound: f64,
}

impl Default for SmcConfig {
    fn default() -> Self {
        SmcConfig {
            surface_slope: 500.0,
            switching_gain: 2e7,
            boundary_layer: 0.0,
            disturbance_bound: 0.0,
        }
    }
}

impl SmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.surface_slope.is_finite() && self.surface_slope > 0.0) {
            return Err(Error::invalid(
                "surface_slope",
                "must be finite and positive",
                self.surface_slope,
            ));
        }
        if !(self.switching_gain.is_finite() && self.switching_gain > 0.0) {
            return Err(Error::invalid(
                "switching_gain",
                "must be finite and positive",
                self.switching_gain,
            ));
        }
        if !(self.boundary_layer.is_finite() && self.boundary_layer >= 0.0) {
            return Err(Error::invalid(
                "boundary_layer",
                "must be finite and non-negative",
                self.boundary_layer,
            ));
        }
        if !(self.disturbance_bound.is_finite() && self.disturbance_bound >= 0.0) {
            return Err(Error::invalid(
                "disturbance_bound",
                "must be finite and non-negative",
                self.disturbance_bound,
            ));
        }
        if self.switching_gain <= self.disturbance_bound {
            return Err(Error::invalid(
                "switching_gain",
                "must exceed disturbance_bound for the reaching condition",
                self.switching_gain,
            ));
        }
        Ok(())
    }
}

/// Sliding surface value s = c*x1 + x2.
pub fn sliding_surface(err: ErrorState, cfg: &SmcConfig) -> f64 {
    cfg.surface_slope * err.voltage_error + err.error_rate
}

/// Switching function: sign outside the boundary layer, linear inside.
/// sw(0) = 0 by convention.
pub fn switching_function(s: f64, phi: f64) -> f64 {
    if phi > 0.0 {
        (s / phi).clamp(-1.0, 1.0)
    } else if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Equivalent control: the duty that holds ds/dt = 0 on the modelled,
/// undisturbed error dynamics.
pub fn equivalent_control(err: ErrorState, params: &ConverterParams, cfg: &SmcConfig) -> f64 {
    let lc = params.inductance * params.capacitance;
    let rc = params.load_resistance * params.capacitance;
    lc / params.input_voltage
        * (cfg.surface_slope * err.error_rate - err.voltage_error / lc - err.error_rate / rc
            + params.reference_voltage / lc)
}

/// Switching control: the duty increment that enforces the reaching law
/// ds/dt = -eta * sw(s). Positive for s > 0 because the duty gain in the
/// error-rate equation is negative.
pub fn switching_control(s: f64, params: &ConverterParams, cfg: &SmcConfig) -> f64 {
    let lc = params.inductance * params.capacitance;
    lc / params.input_voltage * cfg.switching_gain * switching_function(s, cfg.boundary_layer)
}

/// Full sliding-mode duty command before actuator limits.
pub fn smc_duty_unclamped(err: ErrorState, params: &ConverterParams, cfg: &SmcConfig) -> f64 {
    let s = sliding_surface(err, cfg);
    equivalent_control(err, params, cfg) + switching_control(s, params, cfg)
}

/// Full sliding-mode duty command, clamped to the realizable range [0, 1].
pub fn smc_duty(err: ErrorState, params: &ConverterParams, cfg: &SmcConfig) -> f64 {
    smc_duty_unclamped(err, params, cfg).clamp(0.0, 1.0)
}

/// Lyapunov candidate V = s^2 / 2 for reaching-condition diagnostics.
pub fn lyapunov_value(s: f64) -> f64 {
    0.5 * s * s
}
