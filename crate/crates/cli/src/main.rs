use std::process::ExitCode;

fn main() -> ExitCode {
    let cfg = match finv_cli::parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(code) => return ExitCode::from(code as u8),
    };
    let code = finv_cli::run(cfg, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}
