//! `spinsq`: sampling, estimation, analytic variances, sample-size planning
//! and Monte Carlo checks for the optimal spin-squeezing inequalities.
//!
//! Exit status is 0 on success, 2 when arguments or inputs are invalid and
//! 1 on I/O or other runtime failures. Errors go to stderr as JSON.

mod args;
mod commands;
mod output;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use output::{write_report, CliError, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    let (report, output) = match &cli.command {
        Command::Sample(a) => return commands::sample(a),
        Command::Estimate(a) => (commands::estimate(a)?, &a.output),
        Command::Variance(a) => (commands::variance(a)?, &a.output),
        Command::Samplesize(a) => (commands::samplesize(a)?, &a.output),
        Command::Mc(a) => (commands::mc(a)?, &a.output),
        Command::Sweep(a) => (commands::sweep(a)?, &a.output),
    };
    write_report(report, output.format, output.out.as_deref())
}

fn fail(err: CliError) -> ! {
    eprintln!("{}", err.to_json());
    std::process::exit(err.exit_code());
}

fn main() {
    let argv = args::expand_config(std::env::args().collect()).unwrap_or_else(|m| fail(CliError::Validation(m)));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => fail(CliError::Validation(e.render().to_string().trim().to_string())),
    };
    if let Err(e) = run(cli) {
        fail(e);
    }
}
