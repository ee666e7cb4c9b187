//! Speed-spacing phase boundaries and classification.
//!
//! Two quadratic boundary curves split the plane: `phi` (comfort boundary)
//! and `phi_prime` (minimum boundary). They never cross since
//! `phi - phi_prime = (zeta - zeta_min) + v (tau_react - tau_react2) > 0`.

use serde::{Deserialize, Serialize};

use crate::models;
use crate::params::ModelParams;
use crate::state::{NominalSubPhase, PairState, Phase};

/// A point of the speed-spacing plane at a given leader speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub v: f64,
    pub v_leader: f64,
    pub z: f64,
}

impl PhasePoint {
    pub fn from_state(st: &PairState) -> Self {
        Self {
            v: st.v,
            v_leader: st.v_leader,
            z: st.spacing(),
        }
    }
}

/// Projected stopping comfort jam spacing boundary:
/// `phi = zeta - v_L^2/(2 beta_L) + v tau_react + v^2/(2 beta)`.
/// May be negative for fast leaders; phase tests use `max(zeta, phi)`.
pub fn phi(v: f64, v_leader: f64, p: &ModelParams) -> f64 {
    let zeta_proj = p.zeta - v_leader * v_leader / (2.0 * p.beta_leader);
    zeta_proj + v * p.tau_react + v * v / (2.0 * p.beta)
}

/// Projected stopping minimum jam spacing boundary:
/// `phi' = zeta_min - v_L^2/(2 beta_L) + v tau_react2 + v^2/(2 beta)`.
pub fn phi_prime(v: f64, v_leader: f64, p: &ModelParams) -> f64 {
    let zeta_min_proj = p.zeta_min - v_leader * v_leader / (2.0 * p.beta_leader);
    zeta_min_proj + v * p.tau_react2 + v * v / (2.0 * p.beta)
}

/// Total classification of a point into the four phases.
///
/// Tie-breaks: `z == max(zeta, phi)` is nominal, `z == max(zeta_min, phi')`
/// is comfort braking, and any `z < zeta_min` is a collision.
pub fn classify(pt: &PhasePoint, p: &ModelParams) -> Phase {
    let comfort_bound = p.zeta.max(phi(pt.v, pt.v_leader, p));
    let min_bound = p.zeta_min.max(phi_prime(pt.v, pt.v_leader, p));
    if pt.z >= comfort_bound {
        Phase::Nominal(nominal_sub_phase(pt, p))
    } else if pt.z >= min_bound {
        Phase::ComfortBraking
    } else if pt.z >= p.zeta_min {
        Phase::EmergencyBraking
    } else {
        Phase::Collision
    }
}

/// Which term of the extended Newell law is active, with the equilibrium
/// branch split by the sign of `v_* - v`.
fn nominal_sub_phase(pt: &PhasePoint, p: &ModelParams) -> NominalSubPhase {
    let v_star = models::newell_target_speed(pt.z, p);
    let accel_bound = p.alpha * (1.0 - pt.v / p.mu);
    let newell_term = (v_star - pt.v) / p.dt;
    let inner = accel_bound.min(newell_term);
    if inner < -p.beta {
        NominalSubPhase::BoundedDecel
    } else if newell_term <= accel_bound {
        if v_star > pt.v {
            NominalSubPhase::EquilibriumAccel
        } else if v_star < pt.v {
            NominalSubPhase::EquilibriumDecel
        } else {
            NominalSubPhase::EquilibriumCruise
        }
    } else {
        NominalSubPhase::BoundedAccel
    }
}

/// A regular grid over the speed-spacing plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub v_min: f64,
    pub v_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nv: usize,
    pub nz: usize,
}

impl PhaseGrid {
    pub fn v_at(&self, i: usize) -> f64 {
        if self.nv == 1 {
            self.v_min
        } else {
            self.v_min + (self.v_max - self.v_min) * i as f64 / (self.nv - 1) as f64
        }
    }

    pub fn z_at(&self, j: usize) -> f64 {
        if self.nz == 1 {
            self.z_min
        } else {
            self.z_min + (self.z_max - self.z_min) * j as f64 / (self.nz - 1) as f64
        }
    }
}

/// Classifies every grid cell; row-major over (v, z) with z varying fastest.
/// Boundary curves are recoverable as phase transitions between adjacent
/// cells.
pub fn phase_map(grid: &PhaseGrid, v_leader: f64, p: &ModelParams) -> Vec<Phase> {
    let mut out = Vec::with_capacity(grid.nv * grid.nz);
    for i in 0..grid.nv {
        let v = grid.v_at(i);
        for j in 0..grid.nz {
            let z = grid.z_at(j);
            out.push(classify(&PhasePoint { v, v_leader, z }, p));
        }
    }
    out
}

/// CSV serialization of a phase map: `v,z,v_leader,phase_name` per cell.
pub fn phase_map_csv(grid: &PhaseGrid, v_leader: f64, p: &ModelParams) -> String {
    let phases = phase_map(grid, v_leader, p);
    let mut out = String::from("v,z,v_leader,phase_name\n");
    for i in 0..grid.nv {
        for j in 0..grid.nz {
            let ph = phases[i * grid.nz + j];
            out.push_str(&format!(
                "{},{},{},{}\n",
                grid.v_at(i),
                grid.z_at(j),
                v_leader,
                ph.name()
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p() -> ModelParams {
        ModelParams::reference()
    }

    #[test]
    fn phi_examples() {
        let p = p();
        assert_eq!(phi(0.0, 0.0, &p), 7.0);
        assert_abs_diff_eq!(phi(30.0, 0.0, &p), 306.4610778443114, epsilon = 1e-9);
        // negative projected jam spacing is permitted
        assert_abs_diff_eq!(phi(0.0, 30.0, &p), 7.0 - 900.0 / 3.34, epsilon = 1e-9);
    }

    #[test]
    fn phi_prime_examples() {
        let p = p();
        assert_eq!(phi_prime(0.0, 0.0, &p), 5.0);
        assert_abs_diff_eq!(phi_prime(30.0, 0.0, &p), 289.4610778443114, epsilon = 1e-9);
    }

    #[test]
    fn boundary_gap_is_exact() {
        let p = p();
        for &(v, vl) in &[(0.0, 0.0), (30.0, 0.0), (12.5, 28.0), (33.0, 5.0)] {
            let gap = phi(v, vl, &p) - phi_prime(v, vl, &p);
            let expect = (p.zeta - p.zeta_min) + v * (p.tau_react - p.tau_react2);
            assert_abs_diff_eq!(gap, expect, epsilon = 1e-12);
            assert!(gap >= p.zeta - p.zeta_min);
        }
    }

    #[test]
    fn classify_examples() {
        let p = p();
        let at = |v, z| classify(&PhasePoint { v, v_leader: 0.0, z }, &p);
        assert!(at(30.0, 2500.0).is_nominal());
        assert_eq!(at(30.0, 300.0), Phase::ComfortBraking);
        assert_eq!(at(30.0, 200.0), Phase::EmergencyBraking);
        assert_eq!(at(0.0, 4.0), Phase::Collision);
    }

    #[test]
    fn boundary_tie_breaks() {
        let p = p();
        let at = |v, z| classify(&PhasePoint { v, v_leader: 0.0, z }, &p);
        // z exactly on the comfort boundary is nominal
        assert!(at(0.0, p.zeta).is_nominal());
        assert!(at(30.0, phi(30.0, 0.0, &p)).is_nominal());
        // z exactly on the minimum boundary is comfort braking
        assert_eq!(at(30.0, phi_prime(30.0, 0.0, &p)), Phase::ComfortBraking);
        assert_eq!(at(0.0, p.zeta_min), Phase::ComfortBraking);
        // just under the minimum jam spacing is a collision
        assert_eq!(at(0.0, p.zeta_min - 1e-9), Phase::Collision);
    }

    #[test]
    fn sub_phase_structure() {
        let p = p();
        let at = |v, z| classify(&PhasePoint { v, v_leader: 0.0, z }, &p);
        // far away at rest: acceleration-bounded
        assert_eq!(at(0.0, 2500.0), Phase::Nominal(NominalSubPhase::BoundedAccel));
        // at the speed limit with huge spacing: cruise
        assert_eq!(
            at(p.mu, 2500.0),
            Phase::Nominal(NominalSubPhase::EquilibriumCruise)
        );
        // equilibrium spacing at moderate speed (leader matching): cruise
        let v = 10.0;
        assert_eq!(
            classify(
                &PhasePoint {
                    v,
                    v_leader: v,
                    z: p.zeta + p.tau * v
                },
                &p
            ),
            Phase::Nominal(NominalSubPhase::EquilibriumCruise)
        );
    }

    #[test]
    fn single_cell_grid_at_comfort_boundary_is_nominal() {
        let p = p();
        let grid = PhaseGrid {
            v_min: 0.0,
            v_max: 0.0,
            z_min: p.zeta,
            z_max: p.zeta,
            nv: 1,
            nz: 1,
        };
        let map = phase_map(&grid, 0.0, &p);
        assert_eq!(map.len(), 1);
        assert!(map[0].is_nominal());
    }

    #[test]
    fn leader_speed_shifts_boundaries_down() {
        let p = p();
        let shift = 30.0_f64.powi(2) / (2.0 * p.beta_leader);
        for v in [0.0, 10.0, 30.0] {
            assert_abs_diff_eq!(phi(v, 0.0, &p) - phi(v, 30.0, &p), shift, epsilon = 1e-9);
        }
    }
}
