use std::io::Write;
use std::process::ExitCode;

use aidsim::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Some(note) = &out.note {
                eprintln!("{note}");
            }
            let _ = std::io::stdout().write_all(out.render(cli.json).as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("aidsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
