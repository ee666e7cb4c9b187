//! Randomized verification suites for the model's lemmas and theorems.
//!
//! Every suite is deterministic given (seed, cases): each case draws from
//! its own counter-mode RNG stream, results are collected in case order,
//! and reports aggregate with order-independent reductions. Cases run in
//! parallel via rayon when the `parallel` feature (default) is on.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{self, SlvpSolution};
use crate::models;
use crate::params::ModelParams;
use crate::phase;
use crate::projection::{
    classify_lemma_case, min_projected_spacing_bruteforce, projected_stop_spacing, LemmaCase,
    ProjectionInputs,
};
use crate::simulator::{
    self, comfort_braking_entry, Controller, LeaderProfile, MonitorKind, ScenarioConfig,
};
use crate::state::{PairState, Phase};

/// Maps case indices through `f`, in parallel when the `parallel` feature
/// is enabled. Output order always matches case order.
pub fn map_cases<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Always-sequential twin of [`map_cases`], kept for benchmarking the
/// parallel speedup.
pub fn map_cases_seq<T, F>(n: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..n).map(f).collect()
}

/// Caps the global worker-thread count for parallel suites. Must be called
/// before the first parallel suite runs; later calls report an error. A
/// no-op without the `parallel` feature.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> Result<(), String> {
    Ok(())
}

/// Independent RNG for one case: fixed seed, per-case stream.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cases: u64,
}

/// One named check inside a suite. `worst_margin >= 0` means the check
/// held on every case (tolerances are folded into the margin);
/// `asserted = false` marks measurement-only checks that cannot fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub first_failure_case: Option<u64>,
    pub worst_margin: Option<f64>,
    pub asserted: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: &str, cfg: &SuiteConfig, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.pass);
        Self {
            suite: suite.to_string(),
            seed: cfg.seed,
            cases: cfg.cases,
            checks,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown suite '{0}'; known suites: lemma31, theorem32, safety, slvp, fd, boundary")]
pub struct UnknownSuite(pub String);

pub fn suite_names() -> &'static [&'static str] {
    &["lemma31", "theorem32", "safety", "slvp", "fd", "boundary"]
}

/// Runs a named suite. `cases` scales the randomized suites; the
/// deterministic ones (`slvp`, `fd`) ignore it except where noted.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport, UnknownSuite> {
    match name {
        "lemma31" => Ok(lemma31_suite(cfg)),
        "theorem32" => Ok(theorem32_suite(cfg)),
        "safety" => Ok(safety_suite(cfg)),
        "slvp" => Ok(slvp_suite(cfg)),
        "fd" => Ok(fd_suite(cfg)),
        "boundary" => Ok(boundary_suite(cfg)),
        other => Err(UnknownSuite(other.to_string())),
    }
}

fn aggregate(name: &str, margins: &[f64], asserted: bool) -> CheckResult {
    let mut failures = 0;
    let mut first_failure = None;
    let mut worst = f64::INFINITY;
    for (i, &m) in margins.iter().enumerate() {
        if m < worst {
            worst = m;
        }
        if asserted && m < 0.0 {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(i as u64);
            }
        }
    }
    CheckResult {
        name: name.to_string(),
        cases: margins.len() as u64,
        failures,
        first_failure_case: first_failure,
        worst_margin: if margins.is_empty() { None } else { Some(worst) },
        asserted,
        pass: failures == 0,
    }
}

// ---------------------------------------------------------------------------
// Case samplers
// ---------------------------------------------------------------------------

fn sample_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    Uniform::new_inclusive(lo, hi).sample(rng)
}

/// Samples projection inputs guaranteed to classify as `target`.
pub fn sample_lemma_inputs(target: LemmaCase, rng: &mut ChaCha8Rng) -> ProjectionInputs {
    for _ in 0..10_000 {
        let z = sample_range(rng, 0.0, 500.0);
        let candidate = match target {
            LemmaCase::Cond1 => {
                let beta_leader = sample_range(rng, 0.5, 4.0);
                let beta = sample_range(rng, 0.05, beta_leader);
                let v = sample_range(rng, 0.0, 40.0);
                let v_leader = sample_range(rng, 0.0, 40.0);
                let tau_react = sample_range(rng, 0.0, 3.0);
                ProjectionInputs::new(v, v_leader, z, beta, beta_leader, tau_react)
            }
            LemmaCase::Cond2 => {
                let beta_leader = sample_range(rng, 0.5, 3.0);
                let beta = beta_leader + sample_range(rng, 0.1, 2.0);
                let v = sample_range(rng, 0.0, 40.0);
                let tau_react = sample_range(rng, 0.0, 3.0);
                let v_leader =
                    (sample_range(rng, 0.0, 1.0) * beta_leader * (tau_react + v / beta)).min(40.0);
                ProjectionInputs::new(v, v_leader, z, beta, beta_leader, tau_react)
            }
            LemmaCase::Cond3 => {
                let beta_leader = sample_range(rng, 0.5, 3.0);
                let beta = beta_leader + sample_range(rng, 0.1, 2.0);
                let tau_react = sample_range(rng, 0.0, 3.0);
                let v = sample_range(rng, 0.0, 30.0);
                // leader still at least as fast when the reaction ends
                let lo = v + beta_leader * tau_react;
                if lo > 40.0 {
                    continue;
                }
                let v_leader = sample_range(rng, lo, 40.0);
                ProjectionInputs::new(v, v_leader, z, beta, beta_leader, tau_react)
            }
            LemmaCase::Opposite1 => {
                let beta_leader = sample_range(rng, 0.5, 1.5);
                let beta = beta_leader + sample_range(rng, 0.1, 2.5);
                let tau_react = sample_range(rng, 0.05, 1.5);
                let v = sample_range(rng, 1.0, 30.0);
                // follower must stop at least 0.05 s before the leader
                let lo = beta_leader * (tau_react + v / beta + 0.05);
                if lo > v {
                    continue;
                }
                let v_leader = sample_range(rng, lo, v);
                ProjectionInputs::new(v, v_leader, z, beta, beta_leader, tau_react)
            }
            LemmaCase::Opposite2 => {
                let beta_leader = sample_range(rng, 0.5, 1.5);
                let beta = beta_leader + sample_range(rng, 0.1, 2.5);
                let tau_react = sample_range(rng, 0.5, 3.0);
                let v_leader = sample_range(rng, 5.0, 40.0);
                if v_leader / beta_leader <= tau_react {
                    continue;
                }
                let lo = (v_leader - beta_leader * tau_react).max(0.0);
                let hi = v_leader.min(beta * (v_leader / beta_leader - tau_react));
                if lo >= hi {
                    continue;
                }
                let v = lo + (0.001 + 0.998 * sample_range(rng, 0.0, 1.0)) * (hi - lo);
                ProjectionInputs::new(v, v_leader, z, beta, beta_leader, tau_react)
            }
            LemmaCase::Unclassified => unreachable!("no sampler for Unclassified"),
        };
        if let Ok(s) = candidate {
            if classify_lemma_case(&s) == target {
                return s;
            }
        }
    }
    panic!("sampler failed to hit {target:?} after 10000 attempts");
}

fn projection_origin(s: &ProjectionInputs) -> PairState {
    PairState {
        t: 0.0,
        x_follower: 0.0,
        x_leader: s.z,
        v: s.v,
        v_leader: s.v_leader,
    }
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

const BRUTE_FORCE_GRID_DT: f64 = 0.01;

/// Minimum-projected-spacing taxonomy: the floor `min(z, z_stop)` holds for
/// the three covered cases, is strictly violated in the first opposite case,
/// and is merely measured in the second.
fn lemma31_suite(cfg: &SuiteConfig) -> SuiteReport {
    let floor_margin = |target: LemmaCase, salt: u64| {
        map_cases(cfg.cases, move |i| {
            let mut rng = case_rng(cfg.seed ^ salt, i);
            let s = sample_lemma_inputs(target, &mut rng);
            let origin = projection_origin(&s);
            let (bf_min, _) =
                min_projected_spacing_bruteforce(&s, &origin, BRUTE_FORCE_GRID_DT).unwrap();
            let floor = s.z.min(projected_stop_spacing(&s, s.z));
            bf_min - (floor - 1e-6)
        })
    };

    let cond1 = floor_margin(LemmaCase::Cond1, 0x11);
    let cond2 = floor_margin(LemmaCase::Cond2, 0x22);
    let cond3 = floor_margin(LemmaCase::Cond3, 0x33);

    let opposite1 = map_cases(cfg.cases, |i| {
        let mut rng = case_rng(cfg.seed ^ 0x44, i);
        let s = sample_lemma_inputs(LemmaCase::Opposite1, &mut rng);
        let origin = projection_origin(&s);
        let (bf_min, _) =
            min_projected_spacing_bruteforce(&s, &origin, BRUTE_FORCE_GRID_DT).unwrap();
        let floor = s.z.min(projected_stop_spacing(&s, s.z));
        // assert only when the strict inequalities hold with margin
        let stop_gap = s.v_leader / s.beta_leader - (s.tau_react + s.v / s.beta);
        if stop_gap > 1e-6 && s.beta - s.beta_leader > 1e-6 {
            (floor - 1e-9) - bf_min
        } else {
            f64::INFINITY
        }
    });

    let opposite2 = map_cases(cfg.cases, |i| {
        let mut rng = case_rng(cfg.seed ^ 0x55, i);
        let s = sample_lemma_inputs(LemmaCase::Opposite2, &mut rng);
        let origin = projection_origin(&s);
        let (bf_min, _) =
            min_projected_spacing_bruteforce(&s, &origin, BRUTE_FORCE_GRID_DT).unwrap();
        bf_min - s.z.min(projected_stop_spacing(&s, s.z))
    });

    SuiteReport::new(
        "lemma31",
        cfg,
        vec![
            aggregate("cond1_floor", &cond1, true),
            aggregate("cond2_floor", &cond2, true),
            aggregate("cond3_floor", &cond3, true),
            aggregate("opposite1_strict_dip", &opposite1, true),
            aggregate("opposite2_measured", &opposite2, false),
        ],
    )
}

/// Projected safety over all projected times is equivalent to current
/// safety plus projected stopping safety, for covered-case inputs; checked
/// against both jam-spacing thresholds by brute force.
fn theorem32_suite(cfg: &SuiteConfig) -> SuiteReport {
    let p = ModelParams::reference();
    let check = |threshold: f64, salt: u64| {
        map_cases(cfg.cases, move |i| {
            let mut rng = case_rng(cfg.seed ^ salt, i);
            let target = match i % 3 {
                0 => LemmaCase::Cond1,
                1 => LemmaCase::Cond2,
                _ => LemmaCase::Cond3,
            };
            let s = sample_lemma_inputs(target, &mut rng);
            let origin = projection_origin(&s);
            let (bf_min, _) =
                min_projected_spacing_bruteforce(&s, &origin, BRUTE_FORCE_GRID_DT).unwrap();
            let z_stop = projected_stop_spacing(&s, s.z);
            // guard band: skip cases too close to the threshold to resolve
            if (bf_min - threshold).abs() < 1e-6
                || (s.z - threshold).abs() < 1e-6
                || (z_stop - threshold).abs() < 1e-6
            {
                return f64::INFINITY;
            }
            let all_projected_safe = bf_min >= threshold;
            let now_and_stop_safe = s.z >= threshold && z_stop >= threshold;
            if all_projected_safe == now_and_stop_safe {
                1.0
            } else {
                -1.0
            }
        })
    };
    SuiteReport::new(
        "theorem32",
        cfg,
        vec![
            aggregate("equivalence_comfort", &check(p.zeta, 0x66), true),
            aggregate("equivalence_minimum", &check(p.zeta_min, 0x77), true),
        ],
    )
}

/// Bounded control, forward travel, and minimum jam spacing over randomized
/// safe initial states with compliant leader profiles (20 s horizons at
/// dt = 0.01).
fn safety_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut params = ModelParams::reference();
    params.dt = 0.01;

    struct CaseMargins {
        min_jam: f64,
        bounded: f64,
        forward: f64,
    }

    let results = map_cases(cfg.cases, |i| {
        let mut rng = case_rng(cfg.seed ^ 0x88, i);
        let v = sample_range(&mut rng, 0.0, params.mu);
        let v_leader = sample_range(&mut rng, 0.0, params.mu);
        // safe initial spacing, biased toward the boundary
        let u: f64 = sample_range(&mut rng, 0.0, 1.0);
        let z = params
            .zeta_min
            .max(phase::phi_prime(v, v_leader, &params))
            + u * u * 400.0;

        let leader = if sample_range(&mut rng, 0.0, 1.0) < 0.5 {
            LeaderProfile::ConstantSpeed { v: v_leader }
        } else {
            let n_seg = 1 + (sample_range(&mut rng, 0.0, 1.0) * 3.0) as usize;
            let mut segments: Vec<(f64, f64)> = (0..n_seg)
                .map(|_| {
                    (
                        sample_range(&mut rng, 0.0, 20.0),
                        sample_range(&mut rng, 0.0, params.beta_leader),
                    )
                })
                .collect();
            segments.sort_by(|a, b| a.0.total_cmp(&b.0));
            LeaderProfile::PiecewiseBraking { segments }
        };

        let cfg = ScenarioConfig {
            params,
            initial: PairState {
                t: 0.0,
                x_follower: 0.0,
                x_leader: z,
                v,
                v_leader,
            },
            leader,
            duration: 20.0,
            controller: Controller::Mpp,
            monitors: vec![
                MonitorKind::MinJamSpacing,
                MonitorKind::BoundedControl,
                MonitorKind::ForwardTravel,
            ],
            stride: 2000,
            compliant_leader: true,
        };
        let out = simulator::run(&cfg).expect("safety case must simulate");
        let margin = |kind| {
            out.monitors
                .get(kind)
                .map(|r| r.worst_margin)
                .unwrap_or(f64::INFINITY)
        };
        CaseMargins {
            min_jam: margin(MonitorKind::MinJamSpacing),
            bounded: margin(MonitorKind::BoundedControl),
            forward: margin(MonitorKind::ForwardTravel),
        }
    });

    let min_jam: Vec<f64> = results.iter().map(|r| r.min_jam).collect();
    let bounded: Vec<f64> = results.iter().map(|r| r.bounded).collect();
    let forward: Vec<f64> = results.iter().map(|r| r.forward).collect();

    SuiteReport::new(
        "safety",
        cfg,
        vec![
            aggregate("min_jam_spacing", &min_jam, true),
            aggregate("bounded_control", &bounded, true),
            aggregate("forward_travel", &forward, true),
        ],
    )
}

/// Analytic-numeric equivalence on the stationary-lead-vehicle run plus the
/// closed-form solution's own properties.
fn slvp_suite(cfg: &SuiteConfig) -> SuiteReport {
    let scenario = ScenarioConfig::reference_slvp();
    let p = scenario.params;
    let out = simulator::run(&scenario).expect("reference scenario must simulate");
    let entry = comfort_braking_entry(&out.trajectory).expect("run must enter comfort braking");
    let sol = SlvpSolution::new(entry.v, p).expect("positive entry speed");

    // oracle equivalence over the braking segment
    let mut accel_margins = Vec::new();
    let mut spacing_margins = Vec::new();
    for s in &out.trajectory.samples {
        if s.phase != Phase::ComfortBraking || s.state.t < entry.t {
            continue;
        }
        let v = s.state.v.min(sol.v0);
        let a_ref = sol.accel(v).unwrap();
        let z_ref = sol.spacing(v).unwrap();
        accel_margins.push(1e-3 - (s.accel - a_ref).abs());
        spacing_margins.push(0.05 - (s.state.spacing() - z_ref).abs());
    }

    // entry state on the comfort boundary (safe-stopping identity)
    let entry_gap =
        entry.spacing() - p.zeta - (entry.v * p.tau_react + entry.v * entry.v / (2.0 * p.beta));
    let entry_margins = vec![0.01 - entry_gap.abs()];

    // closed-form properties over a dense speed grid
    let grid_n = 10_000usize;
    let mut bounded = Vec::with_capacity(grid_n + 1);
    let mut above_min_spacing = Vec::with_capacity(grid_n + 1);
    let mut jerk_consistency = Vec::new();
    for i in 0..=grid_n {
        // the rounded ratio can exceed v0 by an ulp at the top of the grid
        let v = (sol.v0 * i as f64 / grid_n as f64).min(sol.v0);
        let a = sol.accel(v).unwrap();
        bounded.push(p.beta - (-a));
        let z = sol.spacing(v).unwrap();
        above_min_spacing.push(if v == 0.0 {
            // equality exactly at v = 0
            1e-12 - (z - p.zeta_min).abs()
        } else {
            z - p.zeta_min - f64::MIN_POSITIVE
        });
        // jerk = da/dv * a, via central differences in v (v + h can
        // overshoot v0 by an ulp near the top of the grid, so test it too)
        let h = 1e-4;
        if v > h && v + h <= sol.v0 {
            let dadv = (sol.accel(v + h).unwrap() - sol.accel(v - h).unwrap()) / (2.0 * h);
            let jerk_fd = dadv * a;
            let jerk = sol.jerk(v).unwrap();
            let rel = (jerk - jerk_fd).abs() / jerk.abs().max(1e-300);
            jerk_consistency.push(1e-6 - rel);
        }
    }

    // stopping distance identity at the entry speed
    let stop_identity = (sol.spacing(sol.v0).unwrap()
        - p.zeta
        - (sol.v0 * p.tau_react + sol.v0 * sol.v0 / (2.0 * p.beta)))
        .abs();
    let stop_margins = vec![1e-9 - stop_identity];

    SuiteReport::new(
        "slvp",
        cfg,
        vec![
            aggregate("entry_on_comfort_boundary", &entry_margins, true),
            aggregate("accel_oracle_equivalence", &accel_margins, true),
            aggregate("spacing_oracle_equivalence", &spacing_margins, true),
            aggregate("deceleration_bounded", &bounded, true),
            aggregate("spacing_above_minimum", &above_min_spacing, true),
            aggregate("jerk_accel_consistency", &jerk_consistency, true),
            aggregate("stopping_distance_identity", &stop_margins, true),
        ],
    )
}

/// Fundamental-diagram recovery: 10-vehicle platoons initialized at
/// equilibrium reproduce the extended triangular relation.
fn fd_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut params = ModelParams::reference();
    params.dt = 0.01;
    let n_densities = 20u64;
    let k_max = 1.0 / params.zeta_min;

    let flow_margins = map_cases(n_densities, |i| {
        let k = k_max * (i + 1) as f64 / n_densities as f64;
        let spacing = 1.0 / k;
        let v_eq = analytic::fd_speed(k, &params).expect("k within domain");
        let scenario = ScenarioConfig {
            params,
            initial: PairState {
                t: 0.0,
                x_follower: 0.0,
                x_leader: spacing,
                v: v_eq,
                v_leader: v_eq,
            },
            leader: LeaderProfile::ConstantSpeed { v: v_eq },
            duration: 20.0,
            controller: Controller::Mpp,
            monitors: vec![MonitorKind::MinJamSpacing],
            stride: 2000,
            compliant_leader: true,
        };
        let outs = simulator::run_platoon(10, &scenario, spacing).expect("platoon must simulate");
        // steady-state flow from the last follower's final state
        let last = outs.last().unwrap().trajectory.last_state().copied().unwrap();
        let q_sim = last.v / last.spacing();
        let q_ref = analytic::fd_flow(k, &params).expect("k within domain");
        1e-3 - (q_sim - q_ref).abs()
    });

    let cap = analytic::fd_capacity(&params);
    let k_star = 1.0 / (params.zeta + params.tau * params.mu);
    let capacity_margins = vec![
        1e-6 - (cap.k - k_star).abs(),
        1e-6 - (cap.q - params.mu * k_star).abs(),
    ];

    SuiteReport::new(
        "fd",
        cfg,
        vec![
            aggregate("equilibrium_flow_recovery", &flow_margins, true),
            aggregate("capacity_point", &capacity_margins, true),
        ],
    )
}

/// Exactness at the phase boundaries: full comfort braking exactly on the
/// minimum boundary, and the algebraic gap between the two boundaries.
fn boundary_suite(cfg: &SuiteConfig) -> SuiteReport {
    let p = ModelParams::reference();

    let full_brake = map_cases(cfg.cases, |i| {
        let mut rng = case_rng(cfg.seed ^ 0x99, i);
        let v = sample_range(&mut rng, 1e-3, 40.0);
        let v_leader = sample_range(&mut rng, 0.0, 40.0);
        let z = phase::phi_prime(v, v_leader, &p);
        let st = PairState {
            t: 0.0,
            x_follower: 0.0,
            x_leader: z,
            v,
            v_leader,
        };
        let a = models::comfort_braking_accel(&st, &p).expect("non-negative braking distance");
        1e-12 - (a + p.beta).abs()
    });

    let gap_identity = map_cases(cfg.cases, |i| {
        let mut rng = case_rng(cfg.seed ^ 0xaa, i);
        let v = sample_range(&mut rng, 0.0, 40.0);
        let v_leader = sample_range(&mut rng, 0.0, 40.0);
        let gap = phase::phi(v, v_leader, &p) - phase::phi_prime(v, v_leader, &p);
        let expect = (p.zeta - p.zeta_min) + v * (p.tau_react - p.tau_react2);
        1e-12 - (gap - expect).abs()
    });

    SuiteReport::new(
        "boundary",
        cfg,
        vec![
            aggregate("full_brake_on_min_boundary", &full_brake, true),
            aggregate("boundary_gap_identity", &gap_identity, true),
        ],
    )
}
