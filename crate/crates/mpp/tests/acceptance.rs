//! Acceptance gate: one test (and one printed pass/fail line) per release
//! criterion. Run with `--nocapture` to see the lines for passing criteria.

use std::time::Instant;

use mpp::analytic::{self, SlvpSolution};
use mpp::simulator::{self, comfort_braking_entry, ScenarioConfig};
use mpp::state::Phase;
use mpp::units::ms_to_kmh;
use mpp::verify::{run_suite, SuiteConfig};
use mpp::ModelParams;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} ({detail})",
        if pass { "pass" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_reference_replication() {
    let start = Instant::now();
    let out = simulator::run(&ScenarioConfig::reference_slvp()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let traj = &out.trajectory;

    let peak_kmh = ms_to_kmh(traj.samples.iter().map(|s| s.state.v).fold(0.0, f64::max));
    let entry = comfort_braking_entry(traj).unwrap();
    let stop_dist = traj.last_state().unwrap().x_follower - entry.x_follower;
    let min_a = traj.samples.iter().map(|s| s.accel).fold(0.0, f64::min);
    let final_z = traj.last_state().unwrap().spacing();

    let pass = (106.0..=110.0).contains(&peak_kmh)
        && (297.0..=307.0).contains(&stop_dist)
        && (-1.67..=-1.5).contains(&min_a)
        && (final_z - 5.0).abs() <= 0.05;
    report(
        "1 reference replication",
        pass,
        &format!(
            "peak {peak_kmh:.2} km/h, stop dist {stop_dist:.2} m, min a {min_a:.4}, \
             final z {final_z:.4} m, {elapsed:.1} s"
        ),
    );
}

#[test]
fn criterion_2_safe_stopping_identity() {
    let out = simulator::run(&ScenarioConfig::reference_slvp()).unwrap();
    let p = out.trajectory.params;
    let entry = comfort_braking_entry(&out.trajectory).unwrap();
    let gap =
        entry.spacing() - p.zeta - (entry.v * p.tau_react + entry.v * entry.v / (2.0 * p.beta));
    report(
        "2 safe-stopping identity",
        gap.abs() <= 0.01,
        &format!("|gap| = {:.2e} m", gap.abs()),
    );
}

#[test]
fn criterion_3_analytic_numeric_equivalence() {
    let out = simulator::run(&ScenarioConfig::reference_slvp()).unwrap();
    let p = out.trajectory.params;
    let entry = comfort_braking_entry(&out.trajectory).unwrap();
    let sol = SlvpSolution::new(entry.v, p).unwrap();

    let mut max_da: f64 = 0.0;
    let mut max_dz: f64 = 0.0;
    for s in &out.trajectory.samples {
        if s.phase != Phase::ComfortBraking || s.state.t < entry.t {
            continue;
        }
        let v = s.state.v.min(sol.v0);
        max_da = max_da.max((s.accel - sol.accel(v).unwrap()).abs());
        max_dz = max_dz.max((s.state.spacing() - sol.spacing(v).unwrap()).abs());
    }
    report(
        "3 analytic-numeric equivalence",
        max_da <= 1e-3 && max_dz <= 0.05,
        &format!("max |da| = {max_da:.2e} m/s^2, max |dz| = {max_dz:.2e} m"),
    );
}

#[test]
fn criterion_4_randomized_safety_suite() {
    let start = Instant::now();
    let r = run_suite(
        "safety",
        &SuiteConfig {
            seed: 20260823,
            cases: 100_000,
        },
    )
    .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "4 randomized safety (1e5 cases)",
        r.passed && elapsed < 60.0,
        &format!(
            "checks {:?}, {elapsed:.1} s",
            r.checks
                .iter()
                .map(|c| (c.name.as_str(), c.failures))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_5_min_spacing_taxonomy() {
    let r = run_suite(
        "lemma31",
        &SuiteConfig {
            seed: 20260823,
            cases: 10_000,
        },
    )
    .unwrap();
    report(
        "5 minimum-spacing taxonomy (1e4/case)",
        r.passed,
        &format!(
            "checks {:?}",
            r.checks
                .iter()
                .map(|c| (c.name.as_str(), c.failures))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_6_fd_recovery() {
    let r = run_suite("fd", &SuiteConfig { seed: 0, cases: 1 }).unwrap();
    report(
        "6 fundamental-diagram recovery",
        r.passed,
        &format!(
            "worst flow margin {:?}",
            r.checks[0].worst_margin
        ),
    );
}

#[test]
fn criterion_7_boundary_exactness() {
    let r = run_suite(
        "boundary",
        &SuiteConfig {
            seed: 20260823,
            cases: 1_000,
        },
    )
    .unwrap();
    report(
        "7 boundary exactness (1e3 cases)",
        r.passed,
        &format!(
            "worst margins {:?}",
            r.checks
                .iter()
                .map(|c| (c.name.as_str(), c.worst_margin))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_8_determinism() {
    let cfg = SuiteConfig {
        seed: 7,
        cases: 500,
    };
    let a = serde_json::to_string(&run_suite("lemma31", &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_suite("lemma31", &cfg).unwrap()).unwrap();
    let reports_equal = a == b;

    let mut scenario = ScenarioConfig::reference_slvp();
    scenario.duration = 5.0;
    scenario.params = ModelParams {
        dt: 0.01,
        ..scenario.params
    };
    let csv_a = simulator::run(&scenario).unwrap().trajectory.to_csv();
    let csv_b = simulator::run(&scenario).unwrap().trajectory.to_csv();
    let csv_equal = csv_a.as_bytes() == csv_b.as_bytes();

    report(
        "8 determinism",
        reports_equal && csv_equal,
        &format!("reports equal: {reports_equal}, csv byte-identical: {csv_equal}"),
    );
}

#[test]
fn fd_capacity_analytic() {
    // companion to criterion 6: the capacity point in closed form
    let p = ModelParams::reference();
    let cap = analytic::fd_capacity(&p);
    let k_star = 1.0 / (p.zeta + p.tau * p.mu);
    assert!((cap.k - k_star).abs() <= 1e-6 && (cap.q - p.mu * k_star).abs() <= 1e-6);
}
