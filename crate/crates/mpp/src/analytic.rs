//! Closed-form oracles: the stationary-lead-vehicle braking profile and the
//! extended triangular fundamental diagram.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ModelParams;

/// Closed-form solution family of the stationary-lead-vehicle problem over
/// the comfort-braking segment: `a(v) = -v / (tau_react + C v)` with
/// `C = 2 (zeta - zeta_min) / v0^2 + 1 / beta`, where `v0` is the speed at
/// comfort-braking entry (not necessarily the scenario's initial speed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlvpSolution {
    pub v0: f64,
    /// The constant C (s/m); always > 1/beta since zeta > zeta_min.
    pub c: f64,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("speed {0} outside the solution domain [0, {1}]")]
    SpeedOutOfDomain(f64, f64),
    #[error("entry speed must be positive, got {0}")]
    NonPositiveEntrySpeed(f64),
    #[error("density {0} outside the domain ({1}, {2}]")]
    DensityOutOfDomain(f64, f64, f64),
}

impl SlvpSolution {
    pub fn new(v0: f64, params: ModelParams) -> Result<Self, AnalyticError> {
        if !(v0 > 0.0) {
            return Err(AnalyticError::NonPositiveEntrySpeed(v0));
        }
        let c = 2.0 * (params.zeta - params.zeta_min) / (v0 * v0) + 1.0 / params.beta;
        Ok(Self { v0, c, params })
    }

    fn check_domain(&self, v: f64) -> Result<(), AnalyticError> {
        if !(0.0..=self.v0).contains(&v) {
            return Err(AnalyticError::SpeedOutOfDomain(v, self.v0));
        }
        Ok(())
    }

    /// Deceleration profile in the speed domain: `a(v) = -v/(tau' + C v)`.
    pub fn accel(&self, v: f64) -> Result<f64, AnalyticError> {
        self.check_domain(v)?;
        Ok(-v / (self.params.tau_react + self.c * v))
    }

    /// Spacing as a function of speed:
    /// `z(v) = zeta_min + tau' v + ((zeta - zeta_min)/v0^2 + 1/(2 beta)) v^2`.
    pub fn spacing(&self, v: f64) -> Result<f64, AnalyticError> {
        self.check_domain(v)?;
        let p = &self.params;
        let quad = (p.zeta - p.zeta_min) / (self.v0 * self.v0) + 1.0 / (2.0 * p.beta);
        Ok(p.zeta_min + p.tau_react * v + quad * v * v)
    }

    /// Projected braking distance along the solution:
    /// `B(v) = (tau'/2) v + ((zeta - zeta_min)/v0^2 + 1/(2 beta)) v^2`.
    pub fn braking_distance(&self, v: f64) -> Result<f64, AnalyticError> {
        self.check_domain(v)?;
        let p = &self.params;
        let quad = (p.zeta - p.zeta_min) / (self.v0 * self.v0) + 1.0 / (2.0 * p.beta);
        Ok(0.5 * p.tau_react * v + quad * v * v)
    }

    /// Jerk along the solution: `tau' v / (tau' + C v)^3`, strictly positive
    /// for v > 0 (the deceleration magnitude relaxes toward the stop).
    pub fn jerk(&self, v: f64) -> Result<f64, AnalyticError> {
        self.check_domain(v)?;
        let d = self.params.tau_react + self.c * v;
        Ok(self.params.tau_react * v / (d * d * d))
    }
}

/// One point of the flow-density relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdPoint {
    /// Density (veh/m).
    pub k: f64,
    /// Speed (m/s).
    pub v: f64,
    /// Flow (veh/s), `q = k v` on the Newell branch and 0 beyond jam density.
    pub q: f64,
}

/// Equilibrium speed of the extended triangular fundamental diagram:
/// `v = max(0, min(mu, (1/tau)(1/k - zeta)))`. Domain `0 < k <= 1/zeta_min`.
pub fn fd_speed(k: f64, p: &ModelParams) -> Result<f64, AnalyticError> {
    let k_max = 1.0 / p.zeta_min;
    if !(k > 0.0 && k <= k_max) {
        return Err(AnalyticError::DensityOutOfDomain(k, 0.0, k_max));
    }
    Ok((p.mu.min((1.0 / k - p.zeta) / p.tau)).max(0.0))
}

/// Equilibrium flow: `q = max(0, min(mu k, (1/tau)(1 - k zeta)))`, with
/// `q(0) = 0`. Domain `0 <= k <= 1/zeta_min`.
pub fn fd_flow(k: f64, p: &ModelParams) -> Result<f64, AnalyticError> {
    let k_max = 1.0 / p.zeta_min;
    if !(k >= 0.0 && k <= k_max) {
        return Err(AnalyticError::DensityOutOfDomain(k, 0.0, k_max));
    }
    Ok(((p.mu * k).min((1.0 - k * p.zeta) / p.tau)).max(0.0))
}

/// Capacity point: `k* = 1/(zeta + tau mu)`, `q* = mu k*`.
pub fn fd_capacity(p: &ModelParams) -> FdPoint {
    let k = 1.0 / (p.zeta + p.tau * p.mu);
    FdPoint {
        k,
        v: p.mu,
        q: p.mu * k,
    }
}

/// Samples the fundamental diagram at `n` densities spanning
/// `(0, 1/zeta_min]`.
pub fn fd_table(n: usize, p: &ModelParams) -> Vec<FdPoint> {
    let k_max = 1.0 / p.zeta_min;
    (1..=n)
        .map(|i| {
            let k = k_max * i as f64 / n as f64;
            FdPoint {
                k,
                v: fd_speed(k, p).expect("k within domain"),
                q: fd_flow(k, p).expect("k within domain"),
            }
        })
        .collect()
}

/// CSV serialization of a fundamental-diagram table: `k,v,q` per row.
pub fn fd_table_csv(points: &[FdPoint]) -> String {
    let mut out = String::from("k,v,q\n");
    for pt in points {
        out.push_str(&format!("{},{},{}\n", pt.k, pt.v, pt.q));
    }
    out
}
