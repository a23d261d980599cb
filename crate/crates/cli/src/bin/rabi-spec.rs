use clap::Parser;
use rabi_spec::commands::{self, Cli};

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, &argv) {
        Ok(outcome) => std::process::exit(outcome.code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
