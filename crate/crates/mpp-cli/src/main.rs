//! `mpp` command-line front end: scenario runs, phase maps, fundamental
//! diagram tables, closed-form braking profiles, and verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error (bad flags,
//! missing file, malformed config), 3 runtime abort (non-finite state, I/O).

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mpp::analytic::{fd_table, fd_table_csv, SlvpSolution};
use mpp::phase::{phase_map_csv, PhaseGrid};
use mpp::simulator::{self, comfort_braking_entry, ScenarioConfig, SimError};
use mpp::units::ms_to_kmh;
use mpp::verify::{configure_threads, run_suite, suite_names, SuiteConfig};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Multi-phase projection-based car-following model toolkit.
#[derive(Debug, Parser)]
#[command(name = "mpp", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario from a JSON config and write the trajectory CSV.
    Simulate {
        /// Scenario config path; `{}` (or an omitted file body) means the
        /// built-in stationary-lead-vehicle scenario.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a phase classification map over a speed-spacing grid.
    PhaseMap {
        #[command(flatten)]
        params: ParamsArg,
        /// Leader speed (m/s) the map is conditioned on.
        #[arg(long, default_value_t = 0.0)]
        v_leader: f64,
        #[arg(long, default_value_t = 0.0)]
        v_min: f64,
        #[arg(long, default_value_t = 35.0)]
        v_max: f64,
        #[arg(long, default_value_t = 0.0)]
        z_min: f64,
        #[arg(long, default_value_t = 400.0)]
        z_max: f64,
        /// Grid cells along the speed axis.
        #[arg(long, default_value_t = 176)]
        nv: usize,
        /// Grid cells along the spacing axis.
        #[arg(long, default_value_t = 401)]
        nz: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the fundamental diagram table (k, v, q).
    Fd {
        #[command(flatten)]
        params: ParamsArg,
        /// Number of density samples spanning (0, 1/zeta_min].
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the closed-form stationary-lead-vehicle braking profile.
    Slvp {
        #[command(flatten)]
        params: ParamsArg,
        /// Comfort-braking entry speed (m/s).
        #[arg(long, default_value_t = 30.0)]
        v0: f64,
        /// Number of speed samples spanning [0, v0].
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits 0 iff every check passes and prints
    /// the JSON report either way.
    Verify {
        /// Suite name: lemma31, theorem32, safety, slvp, fd, or boundary.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 10_000)]
        cases: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also write the JSON report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replicate the reference braking figure: run.csv, the derived series,
    /// and summary.json in the output directory.
    ReplicateFig {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ParamsArg {
    /// Parameter preset name or a JSON file of overrides.
    #[arg(long, default_value = config::PRESET)]
    params: String,
}

impl ParamsArg {
    fn resolve(&self) -> Result<mpp::ModelParams, CliError> {
        if self.params == config::PRESET {
            return Ok(mpp::ModelParams::reference());
        }
        let text = fs::read_to_string(&self.params)
            .map_err(|e| CliError::usage(format!("cannot read '{}': {e}", self.params)))?;
        let spec: config::ParamsSpec =
            serde_json::from_str(&text).map_err(|e| CliError::usage(e.to_string()))?;
        config::resolve_params(Some(&spec)).map_err(CliError::usage)
    }
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_RUNTIME,
        }
    }
}

fn write_out(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| CliError::runtime(format!("cannot write '{}': {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_scenario(cfg: &ScenarioConfig) -> Result<simulator::RunOutcome, CliError> {
    simulator::run(cfg).map_err(|e| match e {
        SimError::NonFinite { .. } => CliError::runtime(e.to_string()),
        other => CliError::usage(other.to_string()),
    })
}

#[derive(Serialize)]
struct FigSummary {
    peak_speed_kmh: f64,
    stopping_distance_m: f64,
    min_accel: f64,
    final_spacing_m: f64,
}

fn replicate_fig(out_dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create '{}': {e}", out_dir.display())))?;
    let out = run_scenario(&ScenarioConfig::reference_slvp())?;
    let traj = &out.trajectory;
    let samples = &traj.samples;

    let series = |name: &str, header: &str, f: &dyn Fn(&mpp::TrajectorySample) -> String| {
        let mut csv = String::from(header);
        csv.push('\n');
        for s in samples {
            csv.push_str(&f(s));
            csv.push('\n');
        }
        write_out(Some(&out_dir.join(name)), &csv)
    };

    write_out(Some(&out_dir.join("run.csv")), &traj.to_csv())?;
    series("speed_time.csv", "t,v", &|s| format!("{},{}", s.state.t, s.state.v))?;
    series("speed_spacing.csv", "z,v", &|s| {
        format!("{},{}", s.state.spacing(), s.state.v)
    })?;
    series("accel_time.csv", "t,a", &|s| format!("{},{}", s.state.t, s.accel))?;
    series("accel_spacing.csv", "z,a", &|s| {
        format!("{},{}", s.state.spacing(), s.accel)
    })?;
    let phase_row = |s: &mpp::TrajectorySample| {
        format!(
            "{},{},{},{}",
            s.state.t,
            s.state.v,
            s.state.spacing(),
            s.phase.name()
        )
    };
    series("phase_trajectory.csv", "t,v,z,phase_name", &phase_row)?;
    let t_end = traj.last_state().map(|s| s.t).unwrap_or(0.0);
    {
        let mut csv = String::from("t,v,z,phase_name\n");
        for s in samples.iter().filter(|s| s.state.t >= t_end - 20.0) {
            csv.push_str(&phase_row(s));
            csv.push('\n');
        }
        write_out(Some(&out_dir.join("phase_trajectory_last20s.csv")), &csv)?;
    }

    let entry = comfort_braking_entry(traj)
        .ok_or_else(|| CliError::runtime("run never entered comfort braking"))?;
    let last = traj.last_state().unwrap();
    let summary = FigSummary {
        peak_speed_kmh: ms_to_kmh(samples.iter().map(|s| s.state.v).fold(0.0, f64::max)),
        stopping_distance_m: last.x_follower - entry.x_follower,
        min_accel: samples.iter().map(|s| s.accel).fold(0.0, f64::min),
        final_spacing_m: last.spacing(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_out(Some(&out_dir.join("summary.json")), &json)?;
    println!("{json}");
    Ok(())
}

fn dispatch(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Simulate { config, out } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| CliError::usage(format!("cannot read '{}': {e}", config.display())))?;
            let scenario = config::parse_scenario(&text).map_err(CliError::usage)?;
            let outcome = run_scenario(&scenario)?;
            write_out(out.as_deref(), &outcome.trajectory.to_csv())?;
            if out.is_some() {
                // monitor report on stdout when the CSV went to a file
                println!(
                    "{}",
                    serde_json::to_string(&outcome.monitors).expect("report serializes")
                );
            }
            Ok(0)
        }
        Command::PhaseMap {
            params,
            v_leader,
            v_min,
            v_max,
            z_min,
            z_max,
            nv,
            nz,
            out,
        } => {
            if nv == 0 || nz == 0 || !(v_max >= v_min) || !(z_max >= z_min) {
                return Err(CliError::usage("grid must be non-empty and ordered"));
            }
            let p = params.resolve()?;
            let grid = PhaseGrid {
                v_min,
                v_max,
                z_min,
                z_max,
                nv,
                nz,
            };
            write_out(out.as_deref(), &phase_map_csv(&grid, v_leader, &p))?;
            Ok(0)
        }
        Command::Fd { params, points, out } => {
            if points == 0 {
                return Err(CliError::usage("--points must be >= 1"));
            }
            let p = params.resolve()?;
            write_out(out.as_deref(), &fd_table_csv(&fd_table(points, &p)))?;
            Ok(0)
        }
        Command::Slvp {
            params,
            v0,
            points,
            out,
        } => {
            if points == 0 {
                return Err(CliError::usage("--points must be >= 1"));
            }
            let p = params.resolve()?;
            let sol = SlvpSolution::new(v0, p).map_err(|e| CliError::usage(e.to_string()))?;
            let mut csv = String::from("v,a,z,b,jerk\n");
            for i in 0..=points {
                // clamp: the rounded ratio can exceed v0 by an ulp
                let v = (v0 * i as f64 / points as f64).min(v0);
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    v,
                    sol.accel(v).expect("v in domain"),
                    sol.spacing(v).expect("v in domain"),
                    sol.braking_distance(v).expect("v in domain"),
                    sol.jerk(v).expect("v in domain"),
                ));
            }
            write_out(out.as_deref(), &csv)?;
            Ok(0)
        }
        Command::Verify {
            suite,
            cases,
            seed,
            out,
        } => {
            if let Ok(threads) = std::env::var("MPP_THREADS") {
                let n: usize = threads
                    .parse()
                    .map_err(|_| CliError::usage(format!("MPP_THREADS='{threads}' is not a number")))?;
                if n == 0 {
                    return Err(CliError::usage("MPP_THREADS must be >= 1"));
                }
                configure_threads(n).map_err(CliError::runtime)?;
            }
            let report = run_suite(&suite, &SuiteConfig { seed, cases }).map_err(|e| {
                CliError::usage(format!("{e}; known suites: {}", suite_names().join(", ")))
            })?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{json}");
            if let Some(path) = out {
                write_out(Some(&path), &json)?;
            }
            Ok(if report.passed { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::ReplicateFig { out_dir } => {
            replicate_fig(&out_dir)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // clap itself exits with code 2 on malformed flags
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
