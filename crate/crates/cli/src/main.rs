use std::io::IsTerminal;
use std::process::ExitCode;

use polorg_cli::{run, Io, NO_COLOR_VAR};

fn main() -> ExitCode {
    let color = std::env::var_os(NO_COLOR_VAR).is_none() && std::io::stdout().is_terminal() && std::io::stderr().is_terminal();
    let (mut stdin, mut out, mut err) = (std::io::stdin().lock(), std::io::stdout().lock(), std::io::stderr().lock());
    let mut io = Io { stdin: &mut stdin, out: &mut out, err: &mut err, color };
    let code = run(std::env::args_os(), &mut io);
    ExitCode::from(code as u8)
}
