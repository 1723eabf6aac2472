use std::process::ExitCode;

use clap::Parser;
use deco_state::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = execute(&cli);
    let rendered = out.render(cli.format);
    if out.exit_code == 0 || cli.format == deco_state::cli::Format::Json {
        print!("{rendered}");
    } else {
        eprint!("{rendered}");
    }
    ExitCode::from(out.exit_code as u8)
}
