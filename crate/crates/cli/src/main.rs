//! `intergroup-lens`: command-line front-end wiring the pipeline stages.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 I/O error.

mod cli;
mod commands;
mod config;

use clap::Parser;
use intergroup_core::Error;

use crate::cli::{Cli, Command};
use crate::config::FileConfig;

fn main() {
    std::process::exit(run(std::env::args_os()));
}

fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here; they are not failures.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err @ Error::Io { .. }) => {
            eprintln!("error: {err}");
            2
        }
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> intergroup_core::Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let jobs = match cli.jobs {
        Some(j) => Some(j),
        None => file.get_usize("jobs")?,
    };
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        // Ignore the error if a pool already exists (e.g. repeated dispatch
        // in tests); rayon keeps the first configuration.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match &cli.command {
        Command::Synth(args) => commands::run_synth(args, &file, cli.seed),
        Command::Ingest(args) => commands::run_ingest(args, &file, cli.seed),
        Command::Aggregate(args) => commands::run_aggregate(args, &file, cli.seed),
        Command::Agreement(args) => commands::run_agreement(args),
        Command::Train(args) => commands::run_train(args, &file, cli.seed),
        Command::Evaluate(args) => commands::run_evaluate(args, &file, cli.seed),
        Command::Analyze(args) => commands::run_analyze(args, &file),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_exits_zero_and_unknown_flag_exits_one() {
        assert_eq!(run(["intergroup-lens", "--help"]), 0);
        assert_eq!(run(["intergroup-lens", "synth", "--help"]), 0);
        assert_eq!(run(["intergroup-lens", "--version"]), 0);
        assert_eq!(run(["intergroup-lens", "--frobnicate"]), 1);
        assert_eq!(run(["intergroup-lens", "no-such-command"]), 1);
        assert_eq!(run(["intergroup-lens"]), 1);
    }
}
