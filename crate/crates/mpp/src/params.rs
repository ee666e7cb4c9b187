//! Behavioral parameters and their validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::kmh_to_ms;

/// The seven behavioral parameters plus the projected leader deceleration
/// and the discrete step size. All fields are SI (m, s, m/s, m/s^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Comfort jam spacing (m).
    pub zeta: f64,
    /// Minimum jam spacing (m); spacing below this is a collision.
    pub zeta_min: f64,
    /// Minimum time gap (s) of the Newell component.
    pub tau: f64,
    /// Reaction time (s) in the projected braking scenario.
    pub tau_react: f64,
    /// Reaction-time constant (s) of the minimum-spacing boundary;
    /// defaults to `tau_react / 2` and must stay in `[0, tau_react / 2]`.
    pub tau_react2: f64,
    /// Speed limit (m/s).
    pub mu: f64,
    /// Comfort acceleration bound (m/s^2).
    pub alpha: f64,
    /// Comfort deceleration bound (m/s^2, magnitude).
    pub beta: f64,
    /// Projected leader deceleration (m/s^2, magnitude).
    pub beta_leader: f64,
    /// Time-step size (s) of the discrete model.
    pub dt: f64,
}

/// A parameter invariant violation; carries the violated invariant by name.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{invariant} violated")]
pub struct ParamError {
    pub invariant: &'static str,
}

impl ParamError {
    fn new(invariant: &'static str) -> Self {
        Self { invariant }
    }
}

impl ModelParams {
    /// The built-in `paper-5.2` preset: zeta = 7 m, zeta_min = 5 m,
    /// tau = 1.6 s, tau_react = 1 s, mu = 120 km/h, alpha = 0.73 m/s^2,
    /// beta = beta_leader = 1.67 m/s^2, dt = 0.001 s.
    pub fn reference() -> Self {
        Self {
            zeta: 7.0,
            zeta_min: 5.0,
            tau: 1.6,
            tau_react: 1.0,
            tau_react2: 0.5,
            mu: kmh_to_ms(120.0),
            alpha: 0.73,
            beta: 1.67,
            beta_leader: 1.67,
            dt: 0.001,
        }
    }

    /// Checks every invariant, reporting the first violated one by name.
    pub fn validate(&self) -> Result<(), ParamError> {
        let all = [
            self.zeta,
            self.zeta_min,
            self.tau,
            self.tau_react,
            self.tau_react2,
            self.mu,
            self.alpha,
            self.beta,
            self.beta_leader,
            self.dt,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(ParamError::new("all parameters finite"));
        }
        if !(self.zeta_min > 0.0) {
            return Err(ParamError::new("zeta_min > 0"));
        }
        if !(self.zeta > self.zeta_min) {
            return Err(ParamError::new("zeta > zeta_min"));
        }
        if !(self.tau > 0.0) {
            return Err(ParamError::new("tau > 0"));
        }
        if !(self.tau_react >= 0.0) {
            return Err(ParamError::new("tau_react >= 0"));
        }
        if !(self.tau_react2 >= 0.0 && self.tau_react2 <= self.tau_react / 2.0) {
            return Err(ParamError::new("0 <= tau_react2 <= tau_react/2"));
        }
        if !(self.mu > 0.0) {
            return Err(ParamError::new("mu > 0"));
        }
        if !(self.alpha > 0.0) {
            return Err(ParamError::new("alpha > 0"));
        }
        if !(self.beta > 0.0) {
            return Err(ParamError::new("beta > 0"));
        }
        if !(self.beta_leader > 0.0) {
            return Err(ParamError::new("beta_leader > 0"));
        }
        if !(self.beta >= self.beta_leader) {
            return Err(ParamError::new("beta >= beta_leader"));
        }
        if !(self.dt > 0.0) {
            return Err(ParamError::new("dt > 0"));
        }
        Ok(())
    }

    /// Returns `self` unchanged iff all invariants hold.
    pub fn validated(self) -> Result<Self, ParamError> {
        self.validate().map(|()| self)
    }
}
