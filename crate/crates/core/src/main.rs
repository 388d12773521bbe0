//! `sptlab` — exact-diagonalization scans of the superradiant phase
//! transition in a qubit–mechanical system with a tunable quadratic term.

use clap::{Parser, Subcommand};
use sptlab::cli::{self, Config};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sptlab",
    about = "Phase-transition scans for the hybrid qubit-mechanical-cavity model",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (flat key = value with [sections]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (default: <command>.<format>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,

    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Relative convergence tolerance for the truncation loop.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Ceiling on any boson cutoff.
    #[arg(long, global = true)]
    cutoff_max: Option<usize>,

    /// Force mean-field pre-displacement for superradiant points.
    #[arg(long, global = true)]
    predisplace: bool,

    /// Quadrature frame for moment evaluation.
    #[arg(long, global = true, value_parser = ["squeezed", "lab"])]
    frame: Option<String>,

    /// Even moment orders, e.g. 2,4,6,8.
    #[arg(long, global = true)]
    orders: Option<String>,

    /// Additional config overrides as key=value (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every observable at a single parameter point.
    Point,
    /// One-dimensional scan over gtc, x or xi_ratio.
    Sweep,
    /// Two-dimensional xi_ratio × x grid with the analytic boundary.
    PhaseDiagram,
    /// Four-panel higher-order squeezing scan.
    Squeezing,
    /// Ground-energy comparison of the two-mode and effective models.
    ValidateElimination,
    /// Truncation-convergence study at one point.
    Convergence,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Point => "point",
            Command::Sweep => "sweep",
            Command::PhaseDiagram => "phase-diagram",
            Command::Squeezing => "squeezing",
            Command::ValidateElimination => "validate-elimination",
            Command::Convergence => "convergence",
        }
    }
}

fn build_config(cli: &Cli) -> sptlab::Result<Config> {
    let mut cfg = Config::new();
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    if let Some(w) = cli.workers {
        cfg.set("numerics.workers", w.to_string());
    }
    if let Some(t) = cli.tol {
        cfg.set("numerics.tol", format!("{t:e}"));
    }
    if let Some(c) = cli.cutoff_max {
        cfg.set("numerics.cutoff_max", c.to_string());
    }
    if cli.predisplace {
        cfg.set("numerics.predisplace", "on");
    }
    if let Some(f) = &cli.frame {
        cfg.set("frame", f.clone());
    }
    if let Some(o) = &cli.orders {
        cfg.set("orders", o.clone());
    }
    for pair in &cli.sets {
        let Some((k, v)) = pair.split_once('=') else {
            return Err(sptlab::Error::Config(format!(
                "--set expects key=value, got '{pair}'"
            )));
        };
        cfg.set(k.trim(), v.trim().to_string());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let run = || -> sptlab::Result<(cli::Table, cli::RunOutcome, Config)> {
        let mut cfg = build_config(&cli)?;
        let (table, outcome) = match cli.command {
            Command::Point => cli::run_point(&mut cfg)?,
            Command::Sweep => cli::run_sweep(&mut cfg)?,
            Command::PhaseDiagram => cli::run_phase_diagram(&mut cfg)?,
            Command::Squeezing => cli::run_squeezing_scan(&mut cfg)?,
            Command::ValidateElimination => cli::run_validate_elimination(&mut cfg)?,
            Command::Convergence => cli::run_convergence(&mut cfg)?,
        };
        Ok((table, outcome, cfg))
    };
    match run() {
        Ok((table, outcome, cfg)) => {
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.{}", cli.command.name(), cli.format)));
            if let Err(e) = table.write_file(&out, &cli.format, &cfg) {
                eprintln!("sptlab: {e}");
                return ExitCode::from(1);
            }
            // Timing goes to stderr so output files stay byte-identical
            // across reruns.
            eprintln!(
                "sptlab {}: {} rows ({} unconverged) -> {} in {:.1?}",
                cli.command.name(),
                outcome.rows,
                outcome.unconverged,
                out.display(),
                started.elapsed()
            );
            if outcome.unconverged > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("sptlab: {e}");
            ExitCode::from(1)
        }
    }
}
