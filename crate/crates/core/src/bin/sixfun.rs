use clap::Parser;
use sixfun::cli::{run, Cli};
use std::io::Write;

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            std::io::stdout().write_all(out.stdout.as_bytes()).unwrap();
            std::process::exit(out.code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
