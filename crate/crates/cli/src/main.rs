use clap::Parser;
use dirtda_cli::commands::{execute, Cli};

fn main() {
    let code = match execute(Cli::parse()) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}
