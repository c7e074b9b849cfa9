use std::process::ExitCode;

use clap::Parser;

mod args;
mod bench;
mod fit;
mod output;
mod simulate;

use args::{Cli, Command};

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global()?;
    }
    match cli.command {
        Command::Fit(a) => fit::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Benchmarks(a) => bench::run(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("shapes: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
