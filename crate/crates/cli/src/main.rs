use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use vsparse_cli::{run, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match run(&config).and_then(|out| {
        if let Some((path, body)) = &out.file {
            std::fs::write(path, body)?;
        }
        Ok(out)
    }) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = stdout
                .write_all(out.stdout.as_bytes())
                .and_then(|_| stdout.flush());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
