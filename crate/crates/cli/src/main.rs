//! Command-line front end: suite verification, classification reports and
//! CSV trajectories.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kropina::dynamics::{self, FlowError, FlowState, GeodesicMode};
use kropina::suite::{self, Selector, SuiteOptions};
use kropina::{GeometryError, Scene, SceneError};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "kropina", version, about = "Numerical checks for Kropina metrics given by navigation data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and compare verdicts with the scene's expected table.
    Verify {
        /// Built-in scene name or path to a scene file.
        scene: String,
        #[arg(long, default_value = "all", value_parser = parse_selector)]
        suite: Selector,
        #[command(flatten)]
        common: Overrides,
        /// Omit wall-clock timings so repeated runs are byte-identical.
        #[arg(long)]
        no_timings: bool,
        /// Print the key, operation and statement table to stderr.
        #[arg(long)]
        list_coverage: bool,
    },
    /// Predicate classification report as JSON.
    Classify {
        scene: String,
        #[command(flatten)]
        common: Overrides,
    },
    /// Integrate a geodesic and write CSV.
    Geodesic {
        scene: String,
        #[command(flatten)]
        track: Track,
        #[arg(long, value_enum, default_value_t = Mode::Finsler)]
        mode: Mode,
    },
    /// Integrate the flow of the wind with its tangent lift and write CSV.
    Flow {
        scene: String,
        #[command(flatten)]
        track: Track,
    },
}

#[derive(Args)]
struct Overrides {
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scene seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of sample points.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct Track {
    /// Initial point, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    x0: Vec<f64>,
    /// Initial tangent vector, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    y0: Vec<f64>,
    /// Integration time.
    #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
    span: f64,
    /// Step size; defaults to the scene's sampling step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Finsler,
    Riemann,
}

fn parse_selector(s: &str) -> Result<Selector, String> {
    s.parse()
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error(transparent)]
    Suite(#[from] suite::SuiteError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{error}; {written} states written")]
    Trajectory { error: FlowError, written: usize },
    #[error("{0}")]
    Verdicts(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verdicts(_) => 1,
            CliError::Scene(_) | CliError::Input(_) | CliError::Write { .. } => 2,
            CliError::Suite(_) | CliError::Geometry(_) | CliError::Trajectory { .. } => 3,
        }
    }
}

fn load(arg: &str, o: Option<&Overrides>) -> Result<Scene, CliError> {
    let mut scene = Scene::resolve(arg)?;
    if let Some(o) = o {
        if let Some(seed) = o.seed {
            scene.seed = seed;
        }
        match o.points {
            Some(0) => return Err(CliError::Input("--points must be at least 1".into())),
            Some(p) => scene.sampling.points = p,
            None => {}
        }
    }
    Ok(scene)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Write { path: p.display().to_string(), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_track(scene: &Scene, t: &Track) -> Result<f64, CliError> {
    let n = scene.dim;
    if t.x0.len() != n || t.y0.len() != n {
        return Err(CliError::Input(format!("--x0 and --y0 need {n} components each")));
    }
    if !scene.contains(&t.x0) {
        return Err(CliError::Input("--x0 lies outside the scene box".into()));
    }
    let dt = t.dt.unwrap_or(scene.sampling.dt);
    if !(dt > 0.0 && dt.is_finite() && t.span.is_finite()) {
        return Err(CliError::Input("--dt must be positive and --T finite".into()));
    }
    Ok(dt)
}

/// Writes whatever was integrated before a chart or cone exit.
fn trajectory(scene: &Scene, out: Option<&PathBuf>, result: Result<Vec<FlowState>, FlowError>) -> Result<(), CliError> {
    match result {
        Ok(states) => emit(out, &dynamics::states_csv(&scene.nav, &states)),
        Err(FlowError::Geometry(e)) => Err(e.into()),
        Err(error) => {
            let written = error.partial().len();
            if written > 0 {
                emit(out, &dynamics::states_csv(&scene.nav, error.partial()))?;
            }
            Err(CliError::Trajectory { error, written })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Verify { scene, suite: selector, common, no_timings, list_coverage } => {
            let scene = load(&scene, Some(&common))?;
            if list_coverage {
                eprint!("{}", suite::coverage_table());
            }
            let result = suite::run_suite(&scene, SuiteOptions { selector, timings: !no_timings })?;
            emit(common.out.as_ref(), &(result.to_json() + "\n"))?;
            let bad: Vec<String> = result
                .entries
                .iter()
                .filter(|e| e.mismatch() || !e.consistent)
                .map(|e| match (e.mismatch(), e.consistent) {
                    (true, _) => format!("{} verdict {} (expected {})", e.key, e.verdict, !e.verdict),
                    _ => format!("{} cross-checks disagree", e.key),
                })
                .collect();
            if bad.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verdicts(bad.join("; ")))
            }
        }
        Command::Classify { scene, common } => {
            let scene = load(&scene, Some(&common))?;
            let report = kropina::classify::classify(&scene)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(common.out.as_ref(), &(json + "\n"))
        }
        Command::Geodesic { scene, track, mode } => {
            let scene = load(&scene, None)?;
            let dt = check_track(&scene, &track)?;
            let mode = match mode {
                Mode::Finsler => GeodesicMode::Finsler,
                Mode::Riemann => GeodesicMode::Riemann,
            };
            let r = dynamics::integrate_geodesic(&scene.nav, mode, &scene.bounds, &track.x0, &track.y0, track.span, dt).map(|t| t.states);
            trajectory(&scene, track.out.as_ref(), r)
        }
        Command::Flow { scene, track } => {
            let scene = load(&scene, None)?;
            let dt = check_track(&scene, &track)?;
            let s0 = FlowState { t: 0.0, x: track.x0.clone(), y: track.y0.clone() };
            let r = dynamics::integrate_flow(&scene.nav, &scene.bounds, &s0, track.span, dt);
            trajectory(&scene, track.out.as_ref(), r)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
