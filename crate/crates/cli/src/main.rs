use std::process::ExitCode;

fn main() -> ExitCode {
    layoff_sir_cli::run(std::env::args_os())
}
