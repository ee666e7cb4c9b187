//! Fixed-step leader-follower (and platoon) simulation with invariant
//! monitors.
//!
//! Integration follows the discrete model exactly: the speed updates first
//! and the position update uses the new speed. Speeds are clipped at zero as
//! a simulator guard; a monitor records if the clip ever fires under the
//! multi-phase controller (it must not from safe initial states).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{self, ControlDecision};
use crate::params::ModelParams;
use crate::phase::{self, PhasePoint};
use crate::state::{PairState, Phase, Trajectory, TrajectorySample};

/// Speed below which a vehicle counts as stopped (m/s).
const STOP_SPEED_EPS: f64 = 1e-6;
/// Both vehicles must stay stopped this long (s) before the run terminates.
const STOP_HOLD_TIME: f64 = 1.0;

/// Leader speed profile over the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LeaderProfile {
    /// Leader never moves.
    Stationary,
    /// Leader holds a constant speed (m/s).
    ConstantSpeed { v: f64 },
    /// Piecewise constant deceleration segments: each entry is
    /// (start time s, deceleration magnitude m/s^2). Zero acceleration
    /// before the first segment; braking clips the speed at 0.
    PiecewiseBraking { segments: Vec<(f64, f64)> },
    /// Recorded speed series sampled at the model step size.
    Recorded { speeds: Vec<f64> },
}

impl LeaderProfile {
    /// Leader acceleration at step `i` (state time `t`, current leader
    /// speed `v_leader`).
    fn accel(&self, i: usize, t: f64, v_leader: f64, dt: f64) -> f64 {
        match self {
            LeaderProfile::Stationary => 0.0,
            LeaderProfile::ConstantSpeed { v } => (v - v_leader) / dt,
            LeaderProfile::PiecewiseBraking { segments } => {
                let mut a = 0.0;
                for &(t_start, decel) in segments {
                    if t >= t_start {
                        a = -decel;
                    }
                }
                a
            }
            LeaderProfile::Recorded { speeds } => {
                if speeds.is_empty() {
                    return 0.0;
                }
                let next = speeds[(i + 1).min(speeds.len() - 1)];
                (next - v_leader) / dt
            }
        }
    }
}

/// Which control law drives the follower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Controller {
    /// The multi-phase projection-based model.
    Mpp,
    /// Extended Newell with both comfort bounds, in every phase.
    BdaNewell,
    /// Plain Newell target-speed tracking (unbounded acceleration).
    Newell,
}

impl Controller {
    pub fn decide(&self, st: &PairState, p: &ModelParams) -> ControlDecision {
        match self {
            Controller::Mpp => models::mpp_accel(st, p),
            Controller::BdaNewell => ControlDecision {
                a: models::bda_newell_accel(st, p),
                phase: phase::classify(&PhasePoint::from_state(st), p),
                b_tilde: None,
                violation: false,
            },
            Controller::Newell => {
                let v_star = models::newell_target_speed(st.spacing(), p);
                ControlDecision {
                    a: (v_star - st.v) / p.dt,
                    phase: phase::classify(&PhasePoint::from_state(st), p),
                    b_tilde: None,
                    violation: false,
                }
            }
        }
    }
}

/// Invariant monitors evaluated on every simulation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    /// min(z - zeta_min, z - phi') >= -10 dt mu over the whole run.
    MinJamSpacing,
    /// Pre-clip follower speed never drops below -dt beta.
    ForwardTravel,
    /// Applied acceleration within [-beta, alpha] whenever the violation
    /// flag is unset.
    BoundedControl,
    /// (v(t+dt) - v(t)) / dt reproduces the applied acceleration when no
    /// clip fired.
    AccelConsistency,
    /// No single step from a proven-safe phase lands in emergency braking or
    /// collision while the leader is compliant.
    PhaseLegality,
    /// The follower speed clip never fires.
    SpeedClip,
}

impl MonitorKind {
    pub fn all() -> Vec<MonitorKind> {
        vec![
            MonitorKind::MinJamSpacing,
            MonitorKind::ForwardTravel,
            MonitorKind::BoundedControl,
            MonitorKind::AccelConsistency,
            MonitorKind::PhaseLegality,
            MonitorKind::SpeedClip,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            MonitorKind::MinJamSpacing => "min_jam_spacing",
            MonitorKind::ForwardTravel => "forward_travel",
            MonitorKind::BoundedControl => "bounded_control",
            MonitorKind::AccelConsistency => "accel_consistency",
            MonitorKind::PhaseLegality => "phase_legality",
            MonitorKind::SpeedClip => "speed_clip",
        }
    }
}

/// Per-monitor outcome: margins >= 0 mean the invariant held (tolerances
/// are folded into the margin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorResult {
    pub kind: MonitorKind,
    pub pass: bool,
    pub first_violation_t: Option<f64>,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub results: Vec<MonitorResult>,
}

impl MonitorReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn get(&self, kind: MonitorKind) -> Option<&MonitorResult> {
        self.results.iter().find(|r| r.kind == kind)
    }
}

/// Simulation scenario: initial state, leader profile, controller, horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub initial: PairState,
    pub leader: LeaderProfile,
    /// Simulated horizon (s).
    pub duration: f64,
    pub controller: Controller,
    pub monitors: Vec<MonitorKind>,
    /// Output sampling stride in steps (>= 1); monitors still run each step.
    pub stride: usize,
    /// Clip leader decelerations at beta_leader. Disable to probe the
    /// emergency fallback path with a non-compliant leader.
    pub compliant_leader: bool,
}

impl ScenarioConfig {
    /// The stationary lead-vehicle scenario with the reference preset:
    /// v(0) = 0, z(0) = 2500 m, 140 s horizon, dt = 0.001 s.
    pub fn reference_slvp() -> Self {
        let params = ModelParams::reference();
        Self {
            params,
            initial: PairState {
                t: 0.0,
                x_follower: 0.0,
                x_leader: 2500.0,
                v: 0.0,
                v_leader: 0.0,
            },
            leader: LeaderProfile::Stationary,
            duration: 140.0,
            controller: Controller::Mpp,
            monitors: MonitorKind::all(),
            stride: 1,
            compliant_leader: true,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.params.validate()?;
        if !(self.duration > 0.0) {
            return Err(SimError::InvalidConfig("duration > 0"));
        }
        if self.stride == 0 {
            return Err(SimError::InvalidConfig("stride >= 1"));
        }
        if self.initial.v < 0.0 || self.initial.v_leader < 0.0 || !self.initial.is_finite() {
            return Err(SimError::InvalidConfig("initial state invalid"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Params(#[from] crate::params::ParamError),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("platoon needs at least 2 vehicles, got {0}")]
    PlatoonTooSmall(usize),
}

/// One Euler step: speeds update first (clipped at zero), positions advance
/// with the updated speeds.
pub fn step(st: &PairState, a: f64, a_leader: f64, p: &ModelParams) -> PairState {
    let v = (st.v + p.dt * a).max(0.0);
    let v_leader = (st.v_leader + p.dt * a_leader).max(0.0);
    PairState {
        t: st.t + p.dt,
        x_follower: st.x_follower + p.dt * v,
        x_leader: st.x_leader + p.dt * v_leader,
        v,
        v_leader,
    }
}

struct MonitorAcc {
    kind: MonitorKind,
    worst_margin: f64,
    first_violation_t: Option<f64>,
}

impl MonitorAcc {
    fn new(kind: MonitorKind) -> Self {
        Self {
            kind,
            worst_margin: f64::INFINITY,
            first_violation_t: None,
        }
    }

    fn observe(&mut self, margin: f64, t: f64) {
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        if margin < 0.0 && self.first_violation_t.is_none() {
            self.first_violation_t = Some(t);
        }
    }

    fn finish(self) -> MonitorResult {
        MonitorResult {
            pass: self.first_violation_t.is_none(),
            kind: self.kind,
            first_violation_t: self.first_violation_t,
            worst_margin: self.worst_margin,
        }
    }
}

struct Monitors {
    accs: Vec<MonitorAcc>,
    params: ModelParams,
    compliant: bool,
}

impl Monitors {
    fn new(kinds: &[MonitorKind], params: ModelParams, compliant: bool) -> Self {
        Self {
            accs: kinds.iter().map(|&k| MonitorAcc::new(k)).collect(),
            params,
            compliant,
        }
    }

    fn observe_state(&mut self, st: &PairState, d: &ControlDecision) {
        let p = self.params;
        for acc in &mut self.accs {
            match acc.kind {
                MonitorKind::MinJamSpacing => {
                    let z = st.spacing();
                    let m = (z - p.zeta_min).min(z - phase::phi_prime(st.v, st.v_leader, &p))
                        + 10.0 * p.dt * p.mu;
                    acc.observe(m, st.t);
                }
                MonitorKind::BoundedControl => {
                    if !d.violation {
                        let m = (d.a + p.beta + 1e-12).min(p.alpha + 1e-12 - d.a);
                        acc.observe(m, st.t);
                    }
                }
                _ => {}
            }
        }
    }

    fn observe_transition(
        &mut self,
        prev: &PairState,
        d: &ControlDecision,
        raw_v: f64,
        next: &PairState,
        next_phase: Phase,
    ) {
        let p = self.params;
        let clipped = raw_v < 0.0;
        for acc in &mut self.accs {
            match acc.kind {
                MonitorKind::ForwardTravel => {
                    acc.observe(raw_v + p.dt * p.beta, next.t);
                }
                MonitorKind::AccelConsistency => {
                    if !clipped {
                        let fd = (next.v - prev.v) / p.dt;
                        let tol = 1e-9 * (1.0 + d.a.abs());
                        acc.observe(tol - (fd - d.a).abs(), next.t);
                    }
                }
                MonitorKind::PhaseLegality => {
                    if self.compliant && d.phase.is_proven_safe() {
                        let m = if next_phase.is_proven_safe() { 1.0 } else { -1.0 };
                        acc.observe(m, next.t);
                    }
                }
                MonitorKind::SpeedClip => {
                    acc.observe(raw_v + 1e-9, next.t);
                }
                _ => {}
            }
        }
    }

    fn finish(self) -> MonitorReport {
        MonitorReport {
            results: self.accs.into_iter().map(MonitorAcc::finish).collect(),
        }
    }
}

/// Result of a single run: the recorded trajectory and the monitor report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub monitors: MonitorReport,
}

/// Runs one leader-follower scenario with a fixed step, recording every
/// `stride`-th sample (plus the final one). Terminates at the horizon or
/// once both speeds stay below 1e-6 m/s for one simulated second.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutcome, SimError> {
    cfg.validate()?;
    let p = cfg.params;
    let n_steps = (cfg.duration / p.dt).round().max(1.0) as usize;
    let mut monitors = Monitors::new(&cfg.monitors, p, cfg.compliant_leader);
    let mut samples = Vec::with_capacity(n_steps / cfg.stride + 2);

    let t0 = cfg.initial.t;
    let mut st = cfg.initial;
    let mut stopped_steps = 0usize;
    let stop_hold_steps = (STOP_HOLD_TIME / p.dt).ceil() as usize;

    let mut decision = cfg.controller.decide(&st, &p);
    monitors.observe_state(&st, &decision);
    samples.push(TrajectorySample {
        state: st,
        accel: decision.a,
        phase: decision.phase,
    });

    for i in 0..n_steps {
        let a_leader_raw = cfg.leader.accel(i, st.t, st.v_leader, p.dt);
        let a_leader = if cfg.compliant_leader {
            a_leader_raw.max(-p.beta_leader)
        } else {
            a_leader_raw
        };
        let raw_v = st.v + p.dt * decision.a;
        let mut next = step(&st, decision.a, a_leader, &p);
        // exact time grid, no accumulation drift
        next.t = t0 + (i + 1) as f64 * p.dt;
        if !next.is_finite() {
            return Err(SimError::NonFinite { t: next.t });
        }

        let next_decision = cfg.controller.decide(&next, &p);
        monitors.observe_transition(&st, &decision, raw_v, &next, next_decision.phase);
        monitors.observe_state(&next, &next_decision);

        st = next;
        decision = next_decision;

        if (i + 1) % cfg.stride == 0 {
            samples.push(TrajectorySample {
                state: st,
                accel: decision.a,
                phase: decision.phase,
            });
        }

        if st.v < STOP_SPEED_EPS && st.v_leader < STOP_SPEED_EPS {
            stopped_steps += 1;
            if stopped_steps >= stop_hold_steps {
                break;
            }
        } else {
            stopped_steps = 0;
        }
    }

    // flush the final state if the stride skipped it
    if samples.last().map(|s| s.state.t) != Some(st.t) {
        samples.push(TrajectorySample {
            state: st,
            accel: decision.a,
            phase: decision.phase,
        });
    }

    Ok(RunOutcome {
        trajectory: Trajectory {
            samples,
            params: p,
            stride: cfg.stride,
        },
        monitors: monitors.finish(),
    })
}

/// Runs an `n`-vehicle platoon: vehicle 0 follows the leader profile, each
/// vehicle i follows vehicle i-1 under the scenario's controller. Initial
/// spacings are all `spacing_init`; followers start at `cfg.initial.v`,
/// the profile-driven lead vehicle at `cfg.initial.v_leader`. Returns one
/// outcome per following pair (n - 1 trajectories).
pub fn run_platoon(
    n: usize,
    cfg: &ScenarioConfig,
    spacing_init: f64,
) -> Result<Vec<RunOutcome>, SimError> {
    if n < 2 {
        return Err(SimError::PlatoonTooSmall(n));
    }
    cfg.validate()?;
    let p = cfg.params;
    let n_steps = (cfg.duration / p.dt).round().max(1.0) as usize;
    let t0 = cfg.initial.t;

    // positions front-to-back; index 0 is the profile-driven lead vehicle
    let mut x: Vec<f64> = (0..n)
        .map(|i| cfg.initial.x_leader - i as f64 * spacing_init)
        .collect();
    let mut v: Vec<f64> = (0..n)
        .map(|i| if i == 0 { cfg.initial.v_leader } else { cfg.initial.v })
        .collect();

    let pair_state = |x: &[f64], v: &[f64], i: usize, t: f64| PairState {
        t,
        x_follower: x[i],
        x_leader: x[i - 1],
        v: v[i],
        v_leader: v[i - 1],
    };

    let mut monitors: Vec<Monitors> = (1..n)
        .map(|_| Monitors::new(&cfg.monitors, p, cfg.compliant_leader))
        .collect();
    let mut samples: Vec<Vec<TrajectorySample>> = vec![Vec::new(); n - 1];

    let mut decisions: Vec<ControlDecision> = (1..n)
        .map(|i| cfg.controller.decide(&pair_state(&x, &v, i, t0), &p))
        .collect();
    for i in 1..n {
        let st = pair_state(&x, &v, i, t0);
        monitors[i - 1].observe_state(&st, &decisions[i - 1]);
        samples[i - 1].push(TrajectorySample {
            state: st,
            accel: decisions[i - 1].a,
            phase: decisions[i - 1].phase,
        });
    }

    let mut stopped_steps = 0usize;
    let stop_hold_steps = (STOP_HOLD_TIME / p.dt).ceil() as usize;
    let mut steps_executed = 0usize;

    for step_idx in 0..n_steps {
        steps_executed = step_idx + 1;
        let t = t0 + step_idx as f64 * p.dt;
        let t_next = t0 + (step_idx + 1) as f64 * p.dt;

        let a_leader_raw = cfg.leader.accel(step_idx, t, v[0], p.dt);
        let a_leader = if cfg.compliant_leader {
            a_leader_raw.max(-p.beta_leader)
        } else {
            a_leader_raw
        };

        let prev_x = x.clone();
        let prev_v = v.clone();

        // synchronous update of the whole platoon
        let mut raw_vs = vec![0.0; n];
        for i in 0..n {
            let a = if i == 0 { a_leader } else { decisions[i - 1].a };
            raw_vs[i] = v[i] + p.dt * a;
            v[i] = raw_vs[i].max(0.0);
            x[i] += p.dt * v[i];
        }
        if x.iter().any(|xi| !xi.is_finite()) || v.iter().any(|vi| !vi.is_finite()) {
            return Err(SimError::NonFinite { t: t_next });
        }

        for i in 1..n {
            let prev = PairState {
                t,
                x_follower: prev_x[i],
                x_leader: prev_x[i - 1],
                v: prev_v[i],
                v_leader: prev_v[i - 1],
            };
            let next = pair_state(&x, &v, i, t_next);
            let next_decision = cfg.controller.decide(&next, &p);
            monitors[i - 1].observe_transition(
                &prev,
                &decisions[i - 1],
                raw_vs[i],
                &next,
                next_decision.phase,
            );
            monitors[i - 1].observe_state(&next, &next_decision);
            decisions[i - 1] = next_decision;
            if (step_idx + 1) % cfg.stride == 0 {
                samples[i - 1].push(TrajectorySample {
                    state: next,
                    accel: next_decision.a,
                    phase: next_decision.phase,
                });
            }
        }

        if v.iter().all(|&vi| vi < STOP_SPEED_EPS) {
            stopped_steps += 1;
            if stopped_steps >= stop_hold_steps {
                break;
            }
        } else {
            stopped_steps = 0;
        }
    }

    let t_end = t0 + steps_executed as f64 * p.dt;

    let mut out = Vec::with_capacity(n - 1);
    for (i, (smp, mon)) in samples.into_iter().zip(monitors).enumerate() {
        let mut smp = smp;
        // flush final state if the stride skipped it
        let cur = pair_state(&x, &v, i + 1, t_end);
        if smp.last().map(|s| s.state.t) != Some(cur.t) && cur.t > t0 {
            let d = cfg.controller.decide(&cur, &p);
            smp.push(TrajectorySample {
                state: cur,
                accel: d.a,
                phase: d.phase,
            });
        }
        out.push(RunOutcome {
            trajectory: Trajectory {
                samples: smp,
                params: p,
                stride: cfg.stride,
            },
            monitors: mon.finish(),
        });
    }
    Ok(out)
}

/// The comfort-braking entry state of a trajectory: the crossing of
/// `z = max(zeta, phi(v; v_L))`, linearly interpolated between the last
/// nominal sample and the first comfort-braking sample. `None` if the run
/// never switches from nominal driving to comfort braking.
pub fn comfort_braking_entry(traj: &Trajectory) -> Option<PairState> {
    let p = &traj.params;
    let gap = |st: &PairState| {
        st.spacing() - p.zeta.max(phase::phi(st.v, st.v_leader, p))
    };
    for w in traj.samples.windows(2) {
        if w[0].phase.is_nominal() && w[1].phase == Phase::ComfortBraking {
            let (a, b) = (&w[0].state, &w[1].state);
            let (ga, gb) = (gap(a), gap(b));
            let theta = if ga - gb > 0.0 { (ga / (ga - gb)).clamp(0.0, 1.0) } else { 1.0 };
            let lerp = |x: f64, y: f64| x + theta * (y - x);
            return Some(PairState {
                t: lerp(a.t, b.t),
                x_follower: lerp(a.x_follower, b.x_follower),
                x_leader: lerp(a.x_leader, b.x_leader),
                v: lerp(a.v, b.v),
                v_leader: lerp(a.v_leader, b.v_leader),
            });
        }
    }
    None
}
