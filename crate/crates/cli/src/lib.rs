//! Command-line front end for `pcbfire`: `inspect`, `inject`, `eval`, `nms`.

pub mod args;
pub mod commands;
pub mod config;
pub mod render;

use anyhow::Result;

use args::{Cli, Command};
use commands::Verdict;
use config::Config;

pub fn run(cli: &Cli) -> Result<Verdict> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Inspect(a) => commands::run_inspect(a, &cfg).map(|(v, _)| v),
        Command::Inject(a) => {
            for path in commands::run_inject(a, &cfg)? {
                println!("{}", path.display());
            }
            Ok(Verdict::Clean)
        }
        Command::Eval(a) => commands::run_eval(a, &cfg).map(|_| Verdict::Clean),
        Command::Nms(a) => commands::run_nms(a, &cfg).map(|_| Verdict::Clean),
    }
}
