use std::process::ExitCode;

use clap::Parser;
use qed_cli::{run, Outcome, RunConfig};

fn main() -> ExitCode {
    if let Some(n) = std::env::var("QED_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let config = RunConfig::parse();
    match run(&config) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
