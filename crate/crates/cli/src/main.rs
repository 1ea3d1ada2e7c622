use std::process::ExitCode;

use clap::Parser;
use unitrans_cli::error::CliError;
use unitrans_cli::{configure_workers, run, Cli};

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", err.record());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.kind().to_string() + ": " + e.render().to_string().trim())),
    };
    if let Err(e) = configure_workers() {
        return fail(&e);
    }
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
