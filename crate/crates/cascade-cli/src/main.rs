//! Binary entry point: thread-pool setup and exit-code mapping.

use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = cascade_cli::Cli::parse();
    if let Ok(v) = std::env::var("CASCADE_SCOPE_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    match cascade_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
