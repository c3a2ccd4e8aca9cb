use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(horae::cli::run(std::env::args()) as u8)
}
