use std::process::ExitCode;

use clap::Parser;
use cq_radius_cli::{run, Cli};

fn main() -> ExitCode {
    let config = Cli::parse().into_config();
    ExitCode::from(run(&config))
}
