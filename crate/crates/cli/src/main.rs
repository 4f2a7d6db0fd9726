//! `gpiverify`: batch verification runs with JSON reports.
//!
//! Exit codes: 0 pass, 1 failure, 2 indeterminate, 64 usage, 74 I/O.

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use config::RunConfig;
use error::{CliError, EXIT_USAGE};
use output::{Report, Timing};

fn main() {
    std::process::exit(run(std::env::args_os()));
}

fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gpiverify: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli) -> Result<i32, CliError> {
    let start = Instant::now();
    let file = cli.opts.config.as_deref().map(RunConfig::load).transpose()?;
    let mut cfg = RunConfig::resolve(&cli.opts, file, cli.command.words());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    let checks = pool.install(|| commands::execute(&cli.command, &mut cfg))?;
    let timing = cli.opts.timing.then(|| Timing {
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    });
    let report = Report::new(cfg, checks, timing);
    report.emit(cli.opts.out.as_deref())?;
    Ok(report.summary.exit_code())
}
