use std::io;
use std::process::ExitCode;

use clap::Parser;
use rxtx_cli::{run, Cli, Outcome, EXIT_FAILED, EXIT_OK};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match run(&cli, &mut out) {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::Failure) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    ExitCode::from(code as u8)
}
