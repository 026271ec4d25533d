use std::process::ExitCode;

use clap::Parser;
use displaced_lab::cli::{run, Cli, Status};
use displaced_lab::error::EXIT_CONVERGENCE;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("warning: reconstruction did not converge");
            ExitCode::from(EXIT_CONVERGENCE as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
