//! `lck`: run verification suites on gallery fixtures and emit JSON reports.
//!
//! Exit codes: 0 all checks pass, 1 a check fails, 2 unknown fixture or bad id,
//! 3 numerical failure, 4 inadmissible `f`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lck_core::report::{
    error_exit_code, run_potential_first_order, run_potential_orbit, run_report, run_verify, VerifyOptions,
};
use lck_core::LckError;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lck", version, about = "Numerical checks for locally conformally Kähler geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Number of sampled points.
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance of the generic residual checks.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Quadrature nodes for orbit averages (at least 256).
    #[arg(long, default_value_t = 512)]
    nodes: usize,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl Common {
    fn options(&self) -> VerifyOptions {
        VerifyOptions { points: self.points, seed: self.seed, tol: self.tol, nodes: self.nodes }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PotentialKind {
    FirstOrder,
    Orbit,
}

#[derive(Subcommand)]
enum Command {
    /// Run the check suite of one fixture, e.g. `hopf_diag:n=2,beta=0.5`.
    Verify {
        fixture: String,
        #[command(flatten)]
        common: Common,
    },
    /// Solve for a potential: `first-order --f cos:0.3` or `orbit --fixture leeolo:eps=0.3`.
    Potential {
        kind: PotentialKind,
        /// `const:κ` or `cos:ε`.
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        fixture: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every gallery fixture.
    Report {
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn emit<T: Serialize>(value: &T, human: &str, json: &Option<PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    match json {
        Some(path) => {
            std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
            print!("{human}");
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn fail(e: &LckError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(error_exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, common) = match &cli.command {
        Command::Verify { fixture, common } => (run_verify(fixture, &common.options()), common),
        Command::Potential { kind, f, fixture, common } => {
            let r = match kind {
                PotentialKind::FirstOrder => match f {
                    Some(f) => run_potential_first_order(f, &common.options()),
                    None => Err(LckError::Parse("first-order needs --f".into())),
                },
                PotentialKind::Orbit => match fixture {
                    Some(id) => run_potential_orbit(id, &common.options()),
                    None => Err(LckError::Parse("orbit needs --fixture".into())),
                },
            };
            (r, common)
        }
        Command::Report { all, common } => {
            if !all {
                eprintln!("error: report runs the whole gallery; pass --all");
                return ExitCode::from(2);
            }
            let agg = run_report(&common.options());
            let human: String = agg.reports.iter().map(|r| r.summary()).collect::<String>()
                + &format!("{} of {} fixtures pass\n", agg.summary.passed, agg.summary.fixtures);
            if let Err(e) = emit(&agg, &human, &common.json) {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            return ExitCode::from(agg.exit_code() as u8);
        }
    };
    match result {
        Ok(report) => {
            if let Err(e) = emit(&report, &report.summary(), &common.json) {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            if let Some(f) = &report.failure {
                eprintln!("numerical failure: {}{}", f.message, f.point.as_ref().map(|p| format!(" at {p:?}")).unwrap_or_default());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => fail(&e),
    }
}
