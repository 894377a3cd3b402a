use std::process::ExitCode;

fn main() -> ExitCode {
    gvflow::cli::main_with_args(std::env::args_os())
}
