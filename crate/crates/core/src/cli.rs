//! `tricoil` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on runtime
//! failures (including a failed oracle check).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse_config, ScenarioConfig};
use crate::error::{Error, Result};
use crate::experiments::{angle_sweep, run_strategy, summary_stats, threshold_sweep, Strategy};
use crate::geometry::{alpha_grid, FrameMode, SweepAngle};
use crate::magnetics::FormulaMode;
use crate::oracle::{
    verify_current_step, verify_dipole_expansion, verify_weight_step, OracleReport,
};
use crate::{plot, report, CombinerWeights};

pub const OUT_ENV: &str = "TRICOIL_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const ORACLE_ANGLES: usize = 36;
const DIPOLE_TRIALS: usize = 1000;
const WEIGHT_GRID: usize = 200;

#[derive(Debug, Parser)]
#[command(
    name = "tricoil",
    version,
    about = "Tri-directional coil link simulator and beamforming optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON scenario file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overridden by TRICOIL_OUT)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Receiver angle in radians
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,

    /// Convergence threshold in dB
    #[arg(long, global = true)]
    delta: Option<f64>,

    /// Number of points in the angle grid
    #[arg(long, global = true)]
    angles: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Also write SVG plots
    #[arg(long, global = true)]
    plot: bool,

    #[arg(long, global = true, value_enum)]
    frame_mode: Option<FrameArg>,

    #[arg(long, global = true, value_enum)]
    formula_mode: Option<FormulaArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FrameArg {
    Orthonormal,
    Paper,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormulaArg {
    Canonical,
    Paper,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Run the alternating optimization at one angle and write trace.csv
    Optimize,
    /// Compare all strategies over the angle grid and write sweep.csv
    SweepAngle,
    /// Sweep the convergence threshold and write threshold.csv
    SweepThreshold,
    /// Run the brute-force checks and write oracle.csv
    Oracle,
    /// Write the mutual-inductance matrix at one angle to mutual.csv
    Mutual,
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Validation { .. } | Error::InvalidArgument(_) => {
                Failure::Invalid(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let bytes = fs::read(path)
                .map_err(|e| Error::validation("config", format!("{}: {e}", path.display())))?;
            parse_config(&bytes)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(out) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        cfg.output_dir = PathBuf::from(out);
    }
    if let Some(a) = cli.alpha {
        cfg.alpha = a;
    }
    if let Some(d) = cli.delta {
        cfg.delta = d;
    }
    if let Some(n) = cli.angles {
        cfg.angles = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.plot |= cli.plot;
    if let Some(f) = cli.frame_mode {
        cfg.frame_mode = match f {
            FrameArg::Orthonormal => FrameMode::Orthonormal,
            FrameArg::Paper => FrameMode::PaperLiteral,
        };
    }
    if let Some(f) = cli.formula_mode {
        cfg.formula_mode = match f {
            FormulaArg::Canonical => FormulaMode::Canonical,
            FormulaArg::Paper => FormulaMode::PaperLiteral,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> std::result::Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

fn execute(command: Command, cfg: &ScenarioConfig) -> std::result::Result<(), Failure> {
    let scn = cfg.to_scenario()?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out)
        .map_err(|e| Failure::Runtime(format!("creating {}: {e}", out.display())))?;

    match command {
        Command::Optimize => {
            let alpha = SweepAngle::new(cfg.alpha)?;
            let joint = run_strategy(&scn, alpha, Strategy::Joint, cfg.delta)?;
            let equal = run_strategy(&scn, alpha, Strategy::Equal, cfg.delta)?;
            let trace = joint
                .trace
                .as_ref()
                .expect("joint strategy records a trace");
            write(out, "trace.csv", &report::trace_csv(trace, alpha.radians()))?;
            if cfg.plot {
                write(out, "trace.svg", &plot::trace_svg(trace, alpha.radians())?)?;
            }
            println!(
                "alpha={:.6} equal={:.4} dB joint={:.4} dB reduction={:.4} dB iterations={} converged={}",
                alpha.radians(),
                equal.pathloss_db,
                joint.pathloss_db,
                equal.pathloss_db - joint.pathloss_db,
                trace.iterations(),
                trace.converged
            );
        }
        Command::SweepAngle => {
            let grid = alpha_grid(cfg.angles)?;
            let result = angle_sweep(&scn, &grid, cfg.delta)?;
            write(out, "sweep.csv", &report::sweep_csv(&result))?;
            if cfg.plot {
                write(
                    out,
                    "sweep.svg",
                    &plot::sweep_svg(&result, &cfg.strategies)?,
                )?;
            }
            let s = summary_stats(&result)?;
            for st in Strategy::ALL {
                let x = s.stats(st);
                println!(
                    "{:<8} mean={:.4} min={:.4} max={:.4} fluctuation={:.4} dB",
                    st.label(),
                    x.mean,
                    x.min,
                    x.max,
                    x.fluctuation
                );
            }
            println!(
                "mean reduction={:.2}% mean iterations={:.2} all converged={}",
                s.mean_reduction_pct, s.mean_iterations, s.all_converged
            );
        }
        Command::SweepThreshold => {
            let grid = alpha_grid(cfg.angles)?;
            let points = threshold_sweep(&scn, &cfg.deltas, &grid)?;
            write(out, "threshold.csv", &report::threshold_csv(&points))?;
            if cfg.plot {
                write(out, "threshold.svg", &plot::threshold_svg(&points)?)?;
            }
            for p in &points {
                println!(
                    "delta={:.3e} mean reduction={:.3}% mean iterations={:.3}",
                    p.delta, p.mean_reduction_pct, p.mean_iterations
                );
            }
        }
        Command::Oracle => {
            let mut reports: Vec<OracleReport> =
                verify_dipole_expansion(DIPOLE_TRIALS, cfg.seed)?.to_reports();
            for (k, a) in alpha_grid(ORACLE_ANGLES)?.into_iter().enumerate() {
                let m = scn.mutual_at(a)?;
                let mut r =
                    verify_current_step(&m, &CombinerWeights::equal(), cfg.samples, cfg.seed)?;
                r.claim = format!("current_step_{k:02}");
                reports.push(r);
            }
            let alpha = SweepAngle::new(cfg.alpha)?;
            let joint = run_strategy(&scn, alpha, Strategy::Joint, cfg.delta)?;
            let m = scn.mutual_at(alpha)?;
            reports.push(verify_weight_step(&m, &joint.current, WEIGHT_GRID)?.to_report());
            write(out, "oracle.csv", &report::oracle_csv(&reports))?;
            let failed: Vec<&OracleReport> = reports.iter().filter(|r| !r.passed).collect();
            for r in &reports {
                println!(
                    "{:<26} gap={:+.3e} {}",
                    r.claim,
                    r.gap,
                    if r.passed { "ok" } else { "FAILED" }
                );
            }
            if !failed.is_empty() {
                return Err(Failure::Runtime(format!(
                    "{} oracle check(s) failed",
                    failed.len()
                )));
            }
        }
        Command::Mutual => {
            let alpha = SweepAngle::new(cfg.alpha)?;
            let m = scn.mutual_at(alpha)?;
            let csv = report::mutual_csv(&m);
            write(out, "mutual.csv", &csv)?;
            print!("{csv}");
        }
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_INVALID,
                _ => EXIT_INVALID,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = load_config(&cli)
        .map_err(Failure::from)
        .and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}
