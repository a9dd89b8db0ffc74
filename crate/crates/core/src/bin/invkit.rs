use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("INVKIT_LOG")).init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = invkit::cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    ExitCode::from(code as u8)
}
