//! Command-line front end for `galilean-core`.
//!
//! ```text
//! galilean check <file> [--points K] [--seed S] [--tol E] [--appendix]
//! galilean invariants <file> (--at t=..,x=[..],y=[..] | --grid lo:hi:count)
//! galilean geodesic <file> --init t=..,x=[..],y=[..] --end S [--step H] [--develop]
//! ```
//!
//! Every subcommand accepts `--format csv|json`.

pub mod commands;
pub mod points;
pub mod system;

use std::io::Write;

use clap::{Parser, Subcommand};

pub use commands::{Format, Status};

#[derive(Parser, Debug)]
#[command(name = "galilean", version, about = "Galilean Cartan connections of second-order ODE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify the structure equations at random points.
    Check(commands::CheckArgs),
    /// Tabulate the curvature invariants D, Q, P, T.
    Invariants(commands::InvariantsArgs),
    /// Integrate a geodesic and optionally develop it.
    Geodesic(commands::GeodesicArgs),
}

/// Runs a parsed command line, writing results to `out` and diagnostics to
/// `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Status {
    let result = match &cli.command {
        Command::Check(a) => commands::cmd_check(a, out),
        Command::Invariants(a) => commands::cmd_invariants(a, out, err),
        Command::Geodesic(a) => commands::cmd_geodesic(a, out, err),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            Status::InputError
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Status
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                Status::InputError
            } else {
                Status::Pass
            }
        }
    }
}
