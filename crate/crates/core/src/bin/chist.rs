use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(consistent_histories::cli::run_from(std::env::args_os()))
}
