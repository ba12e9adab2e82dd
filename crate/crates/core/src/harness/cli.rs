//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::report::{run_scenario, Overrides};
use super::scenario::{builtin_scenario, load_scenario};
use crate::engine::certify;
use crate::error::Error;
use crate::game::solve_ne;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable selecting stderr verbosity: `quiet`, `info` or `debug`.
pub const LOG_ENV: &str = "COALITION_NASH_LOG";

#[derive(Debug, Parser)]
#[command(name = "coalition-nash", version, about = "Distributed equilibrium seeking for coalition resource-allocation games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BuiltinName {
    Case1,
    Case2,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario's scheme and write trajectory.csv and report.json.
    Run {
        /// Scenario file, or `-` for standard input.
        scenario: PathBuf,
        /// Output directory (default: `out/<scenario name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the iteration budget.
        #[arg(long)]
        iters: Option<usize>,
        /// Override the step size.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Print the equilibrium and coalition objective values.
    SolveNe { scenario: PathBuf },
    /// Print the step-size certificate of the scenario's scheme as JSON.
    Certify { scenario: PathBuf },
    /// Load the scenario and check every invariant.
    Validate { scenario: PathBuf },
    /// Print an embedded scenario file.
    Builtin { name: BuiltinName },
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Diverged { .. } | Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_FAILURE,
    }
}

/// Configures `env_logger` from [`LOG_ENV`]; warnings only when unset.
pub fn init_logging() {
    let level = match std::env::var(LOG_ENV).as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

#[derive(Serialize)]
struct NeOutput {
    x_star: Vec<f64>,
    coalition_values: Vec<f64>,
    kkt_residual: f64,
    constraint_residual: f64,
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("output serializes"))
}

/// Parses `args` (including the program name) and executes the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> crate::Result<i32> {
    match command {
        Command::Run { scenario, out, iters, step } => {
            let s = load_scenario(&scenario)?;
            let dir = out.unwrap_or_else(|| PathBuf::from("out").join(&s.name));
            let overrides = Overrides { max_iters: iters, step };
            let outcome = run_scenario(&s, &dir, &overrides)?;
            print_json(stdout, &outcome.report)?;
            Ok(match outcome.report.passed {
                Some(false) => EXIT_FAILURE,
                _ => EXIT_OK,
            })
        }
        Command::SolveNe { scenario } => {
            let game = load_scenario(&scenario)?.build_game()?;
            let ne = solve_ne(&game, super::report::ORACLE_TOL)?;
            print_json(
                stdout,
                &NeOutput {
                    coalition_values: game.coalition_values(&ne.x_star),
                    x_star: ne.x_star,
                    kkt_residual: ne.kkt_residual,
                    constraint_residual: ne.constraint_residual,
                },
            )?;
            Ok(EXIT_OK)
        }
        Command::Certify { scenario } => {
            let s = load_scenario(&scenario)?;
            let cert = certify(&s.build_game()?, s.algorithm.mode)?;
            print_json(stdout, &cert)?;
            Ok(EXIT_OK)
        }
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            writeln!(stdout, "{}: valid", s.name)?;
            Ok(EXIT_OK)
        }
        Command::Builtin { name } => {
            let key = match name {
                BuiltinName::Case1 => "case1",
                BuiltinName::Case2 => "case2",
            };
            write!(stdout, "{}", builtin_scenario(key).expect("builtin exists"))?;
            Ok(EXIT_OK)
        }
    }
}
