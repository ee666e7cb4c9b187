//! Projected braking trajectories and spacings.
//!
//! At any instant the leader is projected to brake at a constant rate
//! `beta_leader` until stopped; the follower holds its speed for the
//! reaction time `tau_react` and then brakes at `beta`. Projected positions
//! are piecewise (linear / parabolic / constant) in the projected time, so
//! the projected spacing is piecewise quadratic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::PairState;

/// Inputs of the projection: current speeds and spacing plus the projected
/// deceleration rates and reaction time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionInputs {
    /// Follower speed (m/s).
    pub v: f64,
    /// Leader speed (m/s).
    pub v_leader: f64,
    /// Current spacing (m).
    pub z: f64,
    /// Follower projected deceleration (m/s^2, > 0).
    pub beta: f64,
    /// Leader projected deceleration (m/s^2, > 0).
    pub beta_leader: f64,
    /// Follower reaction time (s, >= 0).
    pub tau_react: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectionError {
    #[error("projected time precedes the observation time")]
    PastTime,
    #[error("projection inputs violate invariants: {0}")]
    InvalidInputs(&'static str),
}

impl ProjectionInputs {
    pub fn new(
        v: f64,
        v_leader: f64,
        z: f64,
        beta: f64,
        beta_leader: f64,
        tau_react: f64,
    ) -> Result<Self, ProjectionError> {
        let s = Self {
            v,
            v_leader,
            z,
            beta,
            beta_leader,
            tau_react,
        };
        s.validate().map(|()| s)
    }

    pub fn validate(&self) -> Result<(), ProjectionError> {
        if ![
            self.v,
            self.v_leader,
            self.z,
            self.beta,
            self.beta_leader,
            self.tau_react,
        ]
        .iter()
        .all(|x| x.is_finite())
        {
            return Err(ProjectionError::InvalidInputs("all fields finite"));
        }
        if self.v < 0.0 || self.v_leader < 0.0 {
            return Err(ProjectionError::InvalidInputs("v >= 0, v_leader >= 0"));
        }
        if self.beta <= 0.0 || self.beta_leader <= 0.0 {
            return Err(ProjectionError::InvalidInputs("beta > 0, beta_leader > 0"));
        }
        if self.tau_react < 0.0 {
            return Err(ProjectionError::InvalidInputs("tau_react >= 0"));
        }
        Ok(())
    }

    /// Anchors the projection at a pair state (speeds taken from the state).
    pub fn from_state(
        st: &PairState,
        beta: f64,
        beta_leader: f64,
        tau_react: f64,
    ) -> Result<Self, ProjectionError> {
        Self::new(st.v, st.v_leader, st.spacing(), beta, beta_leader, tau_react)
    }
}

/// Which case of the minimum-projected-spacing lemma an input falls in.
/// Checked in the order Cond1, Cond2, Cond3, Opposite1, Opposite2; Cond1 is
/// disjoint from the rest (`beta <= beta_leader` vs `>`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaCase {
    /// Follower brakes no harder than the leader.
    Cond1,
    /// Follower brakes harder but stops no earlier.
    Cond2,
    /// Follower brakes harder, is slower now and not faster after reacting.
    Cond3,
    /// Follower brakes harder, is not slower now, and stops earlier: the
    /// projected spacing dips strictly below `min(z, z_stop)`.
    Opposite1,
    /// Follower brakes harder, is slower now, stops earlier, and is faster
    /// after reacting: no prediction either way.
    Opposite2,
    Unclassified,
}

/// Leader position projected to `t_prime >= origin.t`: parabolic until the
/// projected stop at `origin.t + v_leader / beta_leader`, constant after.
pub fn projected_leader_pos(
    s: &ProjectionInputs,
    origin: &PairState,
    t_prime: f64,
) -> Result<f64, ProjectionError> {
    if t_prime < origin.t {
        return Err(ProjectionError::PastTime);
    }
    let dt = t_prime - origin.t;
    let t_stop = s.v_leader / s.beta_leader;
    Ok(if dt <= t_stop {
        origin.x_leader + s.v_leader * dt - 0.5 * s.beta_leader * dt * dt
    } else {
        origin.x_leader + s.v_leader * s.v_leader / (2.0 * s.beta_leader)
    })
}

/// Follower position projected to `t_prime >= origin.t`: linear over the
/// reaction time, parabolic while braking, constant after the stop at
/// `origin.t + tau_react + v / beta`.
pub fn projected_follower_pos(
    s: &ProjectionInputs,
    origin: &PairState,
    t_prime: f64,
) -> Result<f64, ProjectionError> {
    if t_prime < origin.t {
        return Err(ProjectionError::PastTime);
    }
    let dt = t_prime - origin.t;
    let t_stop = s.tau_react + s.v / s.beta;
    Ok(if dt <= s.tau_react {
        origin.x_follower + s.v * dt
    } else if dt <= t_stop {
        let b = dt - s.tau_react;
        origin.x_follower + s.v * dt - 0.5 * s.beta * b * b
    } else {
        origin.x_follower + s.v * s.tau_react + s.v * s.v / (2.0 * s.beta)
    })
}

/// Projected spacing at `t_prime`: leader projection minus follower
/// projection.
pub fn projected_spacing(
    s: &ProjectionInputs,
    origin: &PairState,
    t_prime: f64,
) -> Result<f64, ProjectionError> {
    Ok(projected_leader_pos(s, origin, t_prime)? - projected_follower_pos(s, origin, t_prime)?)
}

/// Projected spacing once both vehicles have stopped:
/// `z - v*tau_react + v_leader^2/(2 beta_leader) - v^2/(2 beta)`.
pub fn projected_stop_spacing(s: &ProjectionInputs, z: f64) -> f64 {
    z - s.v * s.tau_react + s.v_leader * s.v_leader / (2.0 * s.beta_leader)
        - s.v * s.v / (2.0 * s.beta)
}

/// Classifies the inputs into the lemma case taxonomy (fixed checking
/// order; see [`LemmaCase`]).
pub fn classify_lemma_case(s: &ProjectionInputs) -> LemmaCase {
    let follower_stop = s.tau_react + s.v / s.beta;
    let leader_stop = s.v_leader / s.beta_leader;
    if s.beta <= s.beta_leader {
        return LemmaCase::Cond1;
    }
    if follower_stop >= leader_stop {
        return LemmaCase::Cond2;
    }
    if s.v < s.v_leader && s.tau_react + s.v / s.beta_leader <= leader_stop {
        return LemmaCase::Cond3;
    }
    if s.v >= s.v_leader && follower_stop < leader_stop {
        return LemmaCase::Opposite1;
    }
    if s.v < s.v_leader && follower_stop < leader_stop && s.v > s.v_leader - s.beta_leader * s.tau_react
    {
        return LemmaCase::Opposite2;
    }
    LemmaCase::Unclassified
}

/// Minimum of the projected spacing over projected times, by grid sampling
/// at `grid_dt` plus one golden-section refinement around the best grid
/// point. Returns `(minimum value, argmin time)`.
///
/// The projected spacing is piecewise quadratic, so a coarse grid with one
/// refinement locates the true minimum to well under 1e-6 m.
pub fn min_projected_spacing_bruteforce(
    s: &ProjectionInputs,
    origin: &PairState,
    grid_dt: f64,
) -> Result<(f64, f64), ProjectionError> {
    if !(grid_dt > 0.0) {
        return Err(ProjectionError::InvalidInputs("grid_dt > 0"));
    }
    let horizon =
        s.tau_react + (s.v / s.beta).max(s.v_leader / s.beta_leader) + grid_dt;
    let t_end = origin.t + horizon;
    let n = (horizon / grid_dt).ceil() as usize;

    let mut best_val = f64::INFINITY;
    let mut best_t = origin.t;
    for i in 0..=n {
        let t = (origin.t + i as f64 * grid_dt).min(t_end);
        let val = projected_spacing(s, origin, t)?;
        if val < best_val {
            best_val = val;
            best_t = t;
        }
    }

    // Golden-section refinement on the bracketing interval.
    let lo = (best_t - grid_dt).max(origin.t);
    let hi = (best_t + grid_dt).min(t_end);
    let (t_ref, v_ref) = golden_section_min(
        |t| projected_spacing(s, origin, t).expect("t within projection range"),
        lo,
        hi,
    );
    if v_ref < best_val {
        best_val = v_ref;
        best_t = t_ref;
    }
    Ok((best_val, best_t))
}

fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if b - a < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn origin_at(x_follower: f64, x_leader: f64) -> PairState {
        PairState {
            t: 0.0,
            x_follower,
            x_leader,
            v: 0.0,
            v_leader: 0.0,
        }
    }

    #[test]
    fn stationary_leader_never_moves() {
        let s = ProjectionInputs::new(10.0, 0.0, 50.0, 1.67, 1.67, 1.0).unwrap();
        let o = origin_at(0.0, 50.0);
        for t in [0.0, 1.0, 5.0, 100.0] {
            assert_eq!(projected_leader_pos(&s, &o, t).unwrap(), 50.0);
        }
    }

    #[test]
    fn leader_parabolic_then_stopped() {
        let s = ProjectionInputs::new(0.0, 20.0, 50.0, 1.67, 1.0, 1.0).unwrap();
        let o = origin_at(0.0, 0.0);
        // v_L^2 / (2 beta_L) = 400 / 2
        assert_abs_diff_eq!(projected_leader_pos(&s, &o, 20.0).unwrap(), 200.0, epsilon = 1e-12);
        // 20*10 - 0.5*1*100
        assert_abs_diff_eq!(projected_leader_pos(&s, &o, 10.0).unwrap(), 150.0, epsilon = 1e-12);
        assert_abs_diff_eq!(projected_leader_pos(&s, &o, 1e6).unwrap(), 200.0, epsilon = 1e-12);
    }

    #[test]
    fn follower_reaction_brake_stop() {
        let s = ProjectionInputs::new(30.0, 0.0, 306.461, 1.67, 1.67, 1.0).unwrap();
        let o = origin_at(0.0, 306.461);
        assert_eq!(projected_follower_pos(&s, &o, 0.0).unwrap(), 0.0);
        // constant-speed reaction segment
        assert_abs_diff_eq!(projected_follower_pos(&s, &o, 1.0).unwrap(), 30.0, epsilon = 1e-12);
        // stopping position 30 + 900/3.34
        let stop = 30.0 + 900.0 / 3.34;
        assert_abs_diff_eq!(projected_follower_pos(&s, &o, 1e6).unwrap(), stop, epsilon = 1e-9);
        assert_abs_diff_eq!(stop, 299.4610778443114, epsilon = 1e-9);
    }

    #[test]
    fn stationary_follower_never_moves() {
        let s = ProjectionInputs::new(0.0, 10.0, 50.0, 1.67, 1.67, 1.0).unwrap();
        let o = origin_at(5.0, 55.0);
        for t in [0.0, 3.0, 50.0] {
            assert_eq!(projected_follower_pos(&s, &o, t).unwrap(), 5.0);
        }
    }

    #[test]
    fn past_time_is_an_error() {
        let s = ProjectionInputs::new(1.0, 1.0, 10.0, 1.0, 1.0, 1.0).unwrap();
        let mut o = origin_at(0.0, 10.0);
        o.t = 5.0;
        assert_eq!(
            projected_leader_pos(&s, &o, 4.9),
            Err(ProjectionError::PastTime)
        );
        assert_eq!(
            projected_follower_pos(&s, &o, 4.9),
            Err(ProjectionError::PastTime)
        );
    }

    #[test]
    fn spacing_at_origin_equals_current_spacing() {
        let s = ProjectionInputs::new(12.0, 8.0, 42.0, 2.0, 1.5, 0.7).unwrap();
        let o = origin_at(10.0, 52.0);
        assert_eq!(projected_spacing(&s, &o, 0.0).unwrap(), 42.0);
    }

    #[test]
    fn spacing_examples() {
        // stationary leader: z - v*tau' - v^2/(2 beta)
        let s = ProjectionInputs::new(30.0, 0.0, 306.461, 1.67, 1.67, 1.0).unwrap();
        let o = origin_at(0.0, 306.461);
        assert_abs_diff_eq!(
            projected_spacing(&s, &o, 1e6).unwrap(),
            306.461 - 30.0 - 900.0 / 3.34,
            epsilon = 1e-9
        );
        // hand integration of the two piecewise profiles
        let s = ProjectionInputs::new(20.0, 20.0, 50.0, 2.0, 1.0, 0.1).unwrap();
        let o = origin_at(0.0, 50.0);
        assert_abs_diff_eq!(projected_spacing(&s, &o, 0.2).unwrap(), 49.99, epsilon = 1e-12);
    }

    #[test]
    fn stop_spacing_examples() {
        let s = ProjectionInputs::new(0.0, 0.0, 12.5, 1.67, 1.67, 1.0).unwrap();
        assert_eq!(projected_stop_spacing(&s, 12.5), 12.5);

        let s = ProjectionInputs::new(30.0, 0.0, 306.461, 1.67, 1.67, 1.0).unwrap();
        assert_abs_diff_eq!(
            projected_stop_spacing(&s, 306.461),
            306.461 - 30.0 - 900.0 / 3.34,
            epsilon = 1e-9
        );

        let s = ProjectionInputs::new(20.0, 20.0, 50.0, 2.0, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(projected_stop_spacing(&s, 50.0), 148.0, epsilon = 1e-12);
    }

    #[test]
    fn lemma_case_examples() {
        let s = ProjectionInputs::new(17.0, 3.0, 40.0, 1.67, 1.67, 1.0).unwrap();
        assert_eq!(classify_lemma_case(&s), LemmaCase::Cond1);

        let s = ProjectionInputs::new(20.0, 10.0, 40.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_lemma_case(&s), LemmaCase::Cond2);

        let s = ProjectionInputs::new(20.0, 20.0, 50.0, 2.0, 1.0, 0.1).unwrap();
        assert_eq!(classify_lemma_case(&s), LemmaCase::Opposite1);
    }

    #[test]
    fn bruteforce_matches_lemma_prediction() {
        // Cond1: minimum is at the stop.
        let s = ProjectionInputs::new(30.0, 0.0, 306.461, 1.67, 1.67, 1.0).unwrap();
        let o = origin_at(0.0, 306.461);
        let (min_z, _) = min_projected_spacing_bruteforce(&s, &o, 0.01).unwrap();
        let z_stop = projected_stop_spacing(&s, 306.461);
        assert_abs_diff_eq!(min_z, z_stop.min(306.461), epsilon = 1e-6);

        // Opposite1: dips strictly below min(z, z_stop).
        let s = ProjectionInputs::new(20.0, 20.0, 50.0, 2.0, 1.0, 0.1).unwrap();
        let o = origin_at(0.0, 50.0);
        let (min_z, t_min) = min_projected_spacing_bruteforce(&s, &o, 0.01).unwrap();
        assert!(min_z < 50.0_f64.min(148.0) - 1e-9);
        assert_abs_diff_eq!(min_z, 49.99, epsilon = 1e-3);
        assert!(t_min > 0.0);
    }

    #[test]
    fn bruteforce_constant_projection() {
        let s = ProjectionInputs::new(0.0, 0.0, 33.0, 1.67, 1.67, 1.0).unwrap();
        let o = origin_at(0.0, 33.0);
        let (min_z, t_min) = min_projected_spacing_bruteforce(&s, &o, 0.01).unwrap();
        assert_eq!(min_z, 33.0);
        assert_eq!(t_min, 0.0);
    }

    #[test]
    fn stop_spacing_agrees_with_long_horizon_projection() {
        let cases = [
            (30.0, 0.0, 306.461, 1.67, 1.67, 1.0),
            (20.0, 20.0, 50.0, 2.0, 1.0, 0.1),
            (5.0, 12.0, 80.0, 3.0, 1.5, 0.4),
        ];
        for (v, vl, z, b, bl, tr) in cases {
            let s = ProjectionInputs::new(v, vl, z, b, bl, tr).unwrap();
            let o = origin_at(0.0, z);
            let horizon = tr + (v / b).max(vl / bl) + 1.0;
            let far = projected_spacing(&s, &o, horizon).unwrap();
            assert_abs_diff_eq!(far, projected_stop_spacing(&s, z), epsilon = 1e-12);
        }
    }
}
