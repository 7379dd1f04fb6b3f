use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(levy_ats::cli::main_with_args(std::env::args_os()))
}
