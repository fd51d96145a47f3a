use std::io::{self, Write};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LPOPNORM_LOG")).init();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = lpopnorm::cli::run(std::env::args_os(), &mut out);
    let _ = out.flush();
    std::process::exit(code);
}
