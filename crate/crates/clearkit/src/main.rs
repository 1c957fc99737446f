//! `clearkit` — scenario runner and design tools for CLEAR readout-reset
//! pulses.
//!
//! Scenario subcommands write CSV/JSON artifacts plus a reproducibility
//! manifest into an output directory; `design`, `ramsey-fit` and `simulate`
//! are one-shot tools. Exit codes: 0 success, 2 configuration error,
//! 3 numerical failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use clearkit::cavity::calibrate_drive;
use clearkit::design::design_clear;
use clearkit::device::DeviceConfig;
use clearkit::experiments::{
    merge_overrides, parse_set_arg, run_scenario, run_simulate, PulseShape, RunSummary,
    ScenarioKind, ScenarioRequest, SimulateRequest,
};
use clearkit::ramsey::{fit_ramsey, parse_trace_csv, RamseyConfig, RamseyTrace};
use clearkit::{Error, Result};

/// Environment variable naming the root of default output directories.
const OUT_DIR_ENV: &str = "CLEARKIT_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "clearkit",
    version,
    about = "Design, simulate and evaluate CLEAR readout-reset pulses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every artifact-writing subcommand.
#[derive(Args)]
struct CommonArgs {
    /// Device parameter JSON file (built-in demo device when omitted)
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Override one setting, e.g. --set p_norm=4 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory [default: $CLEARKIT_OUT_DIR/<name> or ./clearkit-out/<name>]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Base seed for synthetic measurement noise
    #[arg(long, default_value_t = 17)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Residual population vs wait time after a square readout pulse
    DecaySweep(CommonArgs),
    /// Residual population vs drive power at a fixed wait, with model curves
    PowerSweep(CommonArgs),
    /// Phase-space trajectories of square vs CLEAR pulses, thermally mixed
    TrajectoryCompare(CommonArgs),
    /// Residual population vs power: CLEAR against square-plus-wait
    ClearVsSquare(CommonArgs),
    /// CLEAR with shortened ring-down segments across the power sweep
    ShortenedClear(CommonArgs),
    /// Tune the ring-down amplitudes against the simulated measurement loop
    #[command(visible_alias = "optimize")]
    OptimizeRun(CommonArgs),
    /// Synthesize and fit a single Ramsey trace
    RamseySingle(CommonArgs),
    /// Solve a CLEAR pulse and print the design report as JSON
    Design {
        /// Device parameter JSON file (built-in demo device when omitted)
        #[arg(long, value_name = "FILE")]
        params: Option<PathBuf>,
        /// Override a design setting: p_norm, t_up, t_dn, t_flat
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Fit initial photon number and phase to a measured Ramsey trace CSV
    RamseyFit {
        /// CSV file with header t_r_us,signal
        trace: PathBuf,
        /// Device parameter JSON file (built-in demo device when omitted)
        #[arg(long, value_name = "FILE")]
        params: Option<PathBuf>,
        /// Override a fit setting: detuning_mhz
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Simulate one pulse and write its trajectory CSV
    Simulate {
        /// Pulse family to simulate
        #[arg(long, value_enum, default_value_t = ShapeArg::Clear)]
        shape: ShapeArg,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Square,
    Clear,
}

impl From<ShapeArg> for PulseShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Square => PulseShape::Square,
            ShapeArg::Clear => PulseShape::Clear,
        }
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::DecaySweep(a) => scenario(ScenarioKind::DecaySweep, a),
        Command::PowerSweep(a) => scenario(ScenarioKind::PowerSweep, a),
        Command::TrajectoryCompare(a) => scenario(ScenarioKind::TrajectoryCompare, a),
        Command::ClearVsSquare(a) => scenario(ScenarioKind::ClearVsSquare, a),
        Command::ShortenedClear(a) => scenario(ScenarioKind::ShortenedClear, a),
        Command::OptimizeRun(a) => scenario(ScenarioKind::OptimizeRun, a),
        Command::RamseySingle(a) => scenario(ScenarioKind::RamseySingle, a),
        Command::Design { params, set } => design(params, &set),
        Command::RamseyFit { trace, params, set } => ramsey_fit(&trace, params, &set),
        Command::Simulate { shape, common } => simulate(shape.into(), common),
    }
}

fn scenario(kind: ScenarioKind, args: CommonArgs) -> Result<()> {
    let summary = run_scenario(&ScenarioRequest {
        kind,
        device: load_device(args.params.as_deref())?,
        overrides: parse_sets(&args.set)?,
        out_dir: resolve_out_dir(args.out, kind.name()),
        seed: args.seed,
    })?;
    report(&summary);
    Ok(())
}

fn simulate(shape: PulseShape, args: CommonArgs) -> Result<()> {
    let summary = run_simulate(&SimulateRequest {
        shape,
        device: load_device(args.params.as_deref())?,
        overrides: parse_sets(&args.set)?,
        out_dir: resolve_out_dir(args.out, "simulate"),
        seed: args.seed,
    })?;
    report(&summary);
    Ok(())
}

fn design(params: Option<PathBuf>, set: &[String]) -> Result<()> {
    const DEFAULTS: &[(&str, f64)] = &[
        ("p_norm", 3.6),
        ("t_up", 0.15),
        ("t_dn", 0.15),
        ("t_flat", 1.7),
    ];
    let device = load_device(params.as_deref())?.resolve()?;
    let s = merge_overrides("design", DEFAULTS, &parse_sets(set)?)?;
    let eps = calibrate_drive(&device.params).eps_for_power(s["p_norm"])?;
    let report = design_clear(
        &device.params,
        eps,
        s["t_up"],
        s["t_up"],
        s["t_flat"],
        s["t_dn"],
        s["t_dn"],
    )?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(Error::Json)?);
    Ok(())
}

fn ramsey_fit(trace_path: &std::path::Path, params: Option<PathBuf>, set: &[String]) -> Result<()> {
    const DEFAULTS: &[(&str, f64)] = &[("detuning_mhz", 10.0)];
    let device = load_device(params.as_deref())?.resolve()?;
    let s = merge_overrides("ramsey-fit", DEFAULTS, &parse_sets(set)?)?;
    let text = std::fs::read_to_string(trace_path).map_err(|e| {
        Error::Config(format!(
            "cannot read trace file {}: {e}",
            trace_path.display()
        ))
    })?;
    let samples = parse_trace_csv(&text)?;
    let cfg = RamseyConfig {
        detuning: clearkit::units::mhz(s["detuning_mhz"]),
        ..RamseyConfig::standard(&device.params, 0.0, 0)
    };
    let trace = RamseyTrace::from_samples(&samples, cfg)?;
    let fit = fit_ramsey(&trace, &device.params)?;
    println!("{}", serde_json::to_string_pretty(&fit).map_err(Error::Json)?);
    Ok(())
}

fn load_device(path: Option<&std::path::Path>) -> Result<DeviceConfig> {
    match path {
        Some(p) => DeviceConfig::from_path(p),
        None => Ok(DeviceConfig::demo()),
    }
}

fn parse_sets(args: &[String]) -> Result<Vec<(String, f64)>> {
    args.iter().map(|s| parse_set_arg(s)).collect()
}

/// `--out` if given, else `$CLEARKIT_OUT_DIR/<name>`, else `./clearkit-out/<name>`.
fn resolve_out_dir(out: Option<PathBuf>, name: &str) -> PathBuf {
    out.unwrap_or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("clearkit-out"))
            .join(name)
    })
}

fn report(summary: &RunSummary) {
    println!(
        "{}: {} artifacts in {}",
        summary.scenario,
        summary.artifacts.len(),
        summary.out_dir.display()
    );
    for name in &summary.artifacts {
        println!("  {name}");
    }
}
