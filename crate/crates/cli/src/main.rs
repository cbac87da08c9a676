use clap::Parser;

use pcbfire_cli::args::Cli;
use pcbfire_cli::commands::Verdict;

fn main() {
    let cli = Cli::parse();
    let code = match pcbfire_cli::run(&cli) {
        Ok(v) => v.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Verdict::Error.code()
        }
    };
    std::process::exit(code);
}
