use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pathsum_cli::run(std::env::args_os()))
}
