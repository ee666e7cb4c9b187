//! Control laws: Newell target speed, the bounded-acceleration-and-
//! deceleration Newell law for nominal driving, the projected braking
//! distance, the comfort-braking law, and the multi-phase dispatch.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ModelParams;
use crate::phase::{self, PhasePoint};
use crate::state::{PairState, Phase};

/// The outcome of the multi-phase control dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlDecision {
    /// Applied acceleration (m/s^2). In `[-beta, alpha]` whenever
    /// `violation` is unset.
    pub a: f64,
    pub phase: Phase,
    /// Projected braking distance (m); present only in comfort braking.
    pub b_tilde: Option<f64>,
    /// Set when the state was outside the two proven-safe phases and the
    /// full-brake fallback was applied.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// Negative projected braking distance: unreachable from comfort-braking
    /// states, signals a classifier or caller bug.
    #[error("negative projected braking distance {0} with positive speed")]
    NegativeBrakingDistance(f64),
}

/// Newell target speed `v_* = min(mu, (z - zeta) / tau)`. May be negative
/// when `z < zeta`; consumers clamp through the min/max structure below.
pub fn newell_target_speed(z: f64, p: &ModelParams) -> f64 {
    p.mu.min((z - p.zeta) / p.tau)
}

/// Extended Newell acceleration with both comfort bounds applied:
/// `a = max(-beta, min(alpha (1 - v/mu), (v_* - v) / dt))`.
pub fn bda_newell_accel(st: &PairState, p: &ModelParams) -> f64 {
    let v_star = newell_target_speed(st.spacing(), p);
    let accel_bound = p.alpha * (1.0 - st.v / p.mu);
    let newell_term = (v_star - st.v) / p.dt;
    (-p.beta).max(accel_bound.min(newell_term))
}

/// Projected braking distance `B = z - phi'(v; v_L) + v^2/(2 beta)`: the
/// room available for the follower to stop while preserving the minimum jam
/// spacing against a braking leader.
pub fn projected_braking_distance(st: &PairState, p: &ModelParams) -> f64 {
    st.spacing() - phase::phi_prime(st.v, st.v_leader, p) + st.v * st.v / (2.0 * p.beta)
}

/// Comfort-braking law `a = -v^2 / (2 B)`, with `a = 0` at `v = 0` (the
/// vehicle holds). Always in `[-beta, 0]` for comfort-braking states.
pub fn comfort_braking_accel(st: &PairState, p: &ModelParams) -> Result<f64, ModelError> {
    if st.v == 0.0 {
        return Ok(0.0);
    }
    let b = projected_braking_distance(st, p);
    if b < 0.0 {
        return Err(ModelError::NegativeBrakingDistance(b));
    }
    Ok(-st.v * st.v / (2.0 * b))
}

/// Multi-phase dispatch: extended Newell in nominal driving, the projected
/// braking law in comfort braking, and a flagged full-brake fallback in the
/// emergency and collision phases (where the model defines no law).
pub fn mpp_accel(st: &PairState, p: &ModelParams) -> ControlDecision {
    let ph = phase::classify(&PhasePoint::from_state(st), p);
    match ph {
        Phase::Nominal(_) => ControlDecision {
            a: bda_newell_accel(st, p),
            phase: ph,
            b_tilde: None,
            violation: false,
        },
        Phase::ComfortBraking => {
            let b = projected_braking_distance(st, p);
            // b >= v^2/(2 beta) >= 0 holds in this phase by construction
            let a = if st.v == 0.0 { 0.0 } else { -st.v * st.v / (2.0 * b) };
            ControlDecision {
                a,
                phase: ph,
                b_tilde: Some(b),
                violation: false,
            }
        }
        Phase::EmergencyBraking | Phase::Collision => ControlDecision {
            a: -p.beta,
            phase: ph,
            b_tilde: None,
            violation: true,
        },
    }
}
