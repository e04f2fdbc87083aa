use std::process::ExitCode;

fn main() -> ExitCode {
    match aquarium::cli::run_from_args(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(aquarium::cli::CliError::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
