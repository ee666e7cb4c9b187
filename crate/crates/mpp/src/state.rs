//! Leader-follower pair state, phase variants, and trajectory records.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ModelParams;

/// State of a leader-follower pair at one instant. Positions are absolute;
/// spacing is `x_leader - x_follower`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    /// Time (s).
    pub t: f64,
    /// Follower position (m).
    pub x_follower: f64,
    /// Leader position (m).
    pub x_leader: f64,
    /// Follower speed (m/s).
    pub v: f64,
    /// Leader speed (m/s).
    pub v_leader: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("speeds must be non-negative")]
    NegativeSpeed,
    #[error("state must be finite")]
    NonFinite,
}

impl PairState {
    /// Checked constructor: speeds non-negative, everything finite.
    pub fn new(
        t: f64,
        x_follower: f64,
        x_leader: f64,
        v: f64,
        v_leader: f64,
    ) -> Result<Self, StateError> {
        let st = Self {
            t,
            x_follower,
            x_leader,
            v,
            v_leader,
        };
        if !(st.t.is_finite()
            && st.x_follower.is_finite()
            && st.x_leader.is_finite()
            && st.v.is_finite()
            && st.v_leader.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        if st.v < 0.0 || st.v_leader < 0.0 {
            return Err(StateError::NegativeSpeed);
        }
        Ok(st)
    }

    /// Spacing `z = x_leader - x_follower` (m).
    pub fn spacing(&self) -> f64 {
        self.x_leader - self.x_follower
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.x_follower.is_finite()
            && self.x_leader.is_finite()
            && self.v.is_finite()
            && self.v_leader.is_finite()
    }
}

/// Sub-phases of nominal driving, by which term of the extended Newell law
/// is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NominalSubPhase {
    BoundedAccel,
    EquilibriumAccel,
    EquilibriumCruise,
    EquilibriumDecel,
    BoundedDecel,
}

/// Classification of a (v, v_L, z) point. Exactly one variant holds for any
/// point given the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Nominal(NominalSubPhase),
    ComfortBraking,
    EmergencyBraking,
    Collision,
}

impl Phase {
    /// Stable name used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Nominal(NominalSubPhase::BoundedAccel) => "nominal_bounded_accel",
            Phase::Nominal(NominalSubPhase::EquilibriumAccel) => "nominal_equilibrium_accel",
            Phase::Nominal(NominalSubPhase::EquilibriumCruise) => "nominal_equilibrium_cruise",
            Phase::Nominal(NominalSubPhase::EquilibriumDecel) => "nominal_equilibrium_decel",
            Phase::Nominal(NominalSubPhase::BoundedDecel) => "nominal_bounded_decel",
            Phase::ComfortBraking => "comfort_braking",
            Phase::EmergencyBraking => "emergency_braking",
            Phase::Collision => "collision",
        }
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self, Phase::Nominal(_))
    }

    /// Nominal or comfort braking: the two phases with proven safety.
    pub fn is_proven_safe(&self) -> bool {
        matches!(self, Phase::Nominal(_) | Phase::ComfortBraking)
    }
}

/// One recorded simulation sample: state, applied follower acceleration, and
/// the phase the controller saw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub state: PairState,
    /// Applied follower acceleration (m/s^2).
    pub accel: f64,
    pub phase: Phase,
}

/// Time-indexed simulation record. Consecutive samples differ in t by
/// `stride * params.dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub params: ModelParams,
    /// Output sampling stride in steps.
    pub stride: usize,
}

impl Trajectory {
    /// Time between recorded samples (s).
    pub fn sample_dt(&self) -> f64 {
        self.stride as f64 * self.params.dt
    }

    pub fn last_state(&self) -> Option<&PairState> {
        self.samples.last().map(|s| &s.state)
    }

    /// Serializes to CSV with header
    /// `t,x_follower,x_leader,v,v_leader,z,a,phase`. Floats use the shortest
    /// round-trip decimal representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x_follower,x_leader,v,v_leader,z,a,phase\n");
        for s in &self.samples {
            let st = &s.state;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                st.t,
                st.x_follower,
                st.x_leader,
                st.v,
                st.v_leader,
                st.spacing(),
                s.accel,
                s.phase.name()
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_speed_rejected() {
        assert_eq!(
            PairState::new(0.0, 0.0, 10.0, -1.0, 0.0),
            Err(StateError::NegativeSpeed)
        );
        assert_eq!(
            PairState::new(0.0, 0.0, f64::NAN, 0.0, 0.0),
            Err(StateError::NonFinite)
        );
    }

    #[test]
    fn spacing_is_leader_minus_follower() {
        let st = PairState::new(0.0, 3.0, 10.0, 0.0, 0.0).unwrap();
        assert_eq!(st.spacing(), 7.0);
    }
}
