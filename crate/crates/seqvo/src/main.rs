use std::process::ExitCode;

fn main() -> ExitCode {
    seqvo::cli::main_with(std::env::args_os())
}
