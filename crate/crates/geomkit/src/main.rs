use std::process::ExitCode;

use clap::Parser;
use geomkit::cli::{render, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let text = render(&outcome.report, cli.common.format);
    match &cli.common.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("geomkit: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(outcome.code)
}
