use std::process::ExitCode;

use clap::Parser;

use chi2_cli::{run, summary, Cli, Failure};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, path)) => {
            print!("{}", summary(&report));
            println!("report: {}", path.display());
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(f) => {
            let (Failure::Usage(e) | Failure::Runtime(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.exit_code())
        }
    }
}
