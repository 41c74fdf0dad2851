use std::process::ExitCode;

fn main() -> ExitCode {
    let code = star_solve::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
