mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::{CliError, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Estimate(a) => commands::estimate_cmd(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Eval(a) => commands::eval_cmd(a),
        Command::BenchDet(a) => commands::bench_det_cmd(a),
        Command::Transform(a) => commands::transform_cmd(a),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let head = msg.split("\n\nUsage:").next().unwrap_or_default();
            eprintln!(
                "error[usage]: {}",
                one_line(head.trim_start_matches("error:"))
            );
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind_name(), one_line(&e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
