use std::io::Write;
use std::process::ExitCode;

use annulus_cli::report::{tolerances_from_env, write_atomic};
use annulus_cli::{run, Cli, Outcome};
use clap::Parser;

fn emit(out: &Outcome) -> Result<(), annulus_cli::CliError> {
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    match &out.destination {
        Some(path) => write_atomic(path, &out.text),
        None => {
            std::io::stdout().write_all(out.text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let tol = match tolerances_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match run(cli, &tol) {
        Ok(out) => match emit(&out) {
            Ok(()) => ExitCode::from(out.code),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Err((e, report)) => {
            eprintln!("error: {e}");
            if let Some(out) = report {
                let _ = emit(&out);
            }
            ExitCode::from(e.exit_code())
        }
    }
}
