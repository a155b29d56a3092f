use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use cumrate_cli::{run, Cli, EXIT_INVALID};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(emission) => {
            let text = serde_json::to_string_pretty(&emission.output).expect("JSON values serialize");
            // A closed pipe is the reader's choice, not an error.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(emission.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
