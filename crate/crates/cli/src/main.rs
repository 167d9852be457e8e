//! `lidiag`: command-line front end for the degradation diagnosis pipeline.
//!
//! Exit status: 0 on success, 1 when an input or option is invalid, 2 when
//! the simulation or the parameter search fails (including reports marked
//! incomplete).

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        })
        .format_timestamp(None)
        .init();

    match commands::run(cli) {
        Ok(status) => ExitCode::from(status),
        Err(err) => {
            let (code, label) = commands::classify(&err);
            eprintln!("error{label}: {err:#}");
            ExitCode::from(code)
        }
    }
}
