use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    let code = apfree_cli::run(std::env::args_os(), &mut stdout);
    if stdout.flush().is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
