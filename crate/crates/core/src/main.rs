use std::io;
use std::process::ExitCode;

use coalition_nash::harness::{init_logging, run_cli};

fn main() -> ExitCode {
    init_logging();
    let code = run_cli(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
