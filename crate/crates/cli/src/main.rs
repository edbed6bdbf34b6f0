use std::process::ExitCode;

use rvs_cli::{execute, parse_args};

fn main() -> ExitCode {
    if let Some(n) = std::env::var("RVS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cmd = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // 2 for usage errors, 0 for --help and --version
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match execute(&cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
