//! Multi-phase projection-based car-following model.
//!
//! The follower continuously anticipates the leader braking to a full stop at
//! a constant rate and plans its own stop (constant speed during a reaction
//! time, then constant braking). The speed-spacing plane splits into four
//! phases from those projections: nominal driving (extended Newell control),
//! comfort braking (the projection-derived law `a = -v^2 / (2*B)`),
//! emergency braking, and collision. The library provides:
//!
//! - projected trajectories, projected spacings, and a brute-force
//!   minimum-spacing oracle ([`projection`]),
//! - the phase boundary functions and a total classifier ([`phase`]),
//! - the control laws and multi-phase dispatch ([`models`]),
//! - a deterministic fixed-step simulator with invariant monitors
//!   ([`simulator`]),
//! - closed-form oracles: the stationary-lead-vehicle solution family and the
//!   extended triangular fundamental diagram ([`analytic`]),
//! - randomized verification suites ([`verify`]), data-parallel via rayon
//!   when the `parallel` feature (default) is enabled.

pub mod analytic;
pub mod models;
pub mod params;
pub mod phase;
pub mod projection;
pub mod simulator;
pub mod state;
pub mod units;
pub mod verify;

pub use params::{ModelParams, ParamError};
pub use phase::PhasePoint;
pub use state::{NominalSubPhase, PairState, Phase, Trajectory, TrajectorySample};
