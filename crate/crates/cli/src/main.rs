use std::process::ExitCode;

use clap::Parser;
use plasmonium_cli::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            for path in &report.written {
                eprintln!("wrote {}", path.display());
            }
            if report.errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                for e in &report.errors {
                    eprintln!("point {} (E_L = {}) failed: {}", e.index, e.e_l, e.message);
                }
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
