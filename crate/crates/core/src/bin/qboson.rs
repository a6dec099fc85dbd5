use std::fs;
use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser};
use qboson::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (rendered, out) = match (&cli.replay, &cli.command) {
        (Some(path), _) => {
            let doc = match fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
            {
                Ok(doc) => doc,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            (cli::replay(&doc), None)
        }
        (None, Some(cmd)) => (cli::run(cmd), cmd.args().out.clone()),
        (None, None) => {
            let _ = Cli::command().print_help();
            return ExitCode::from(2);
        }
    };
    let text = match rendered {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::exit_code(&e));
        }
    };
    match out {
        Some(path) => {
            if let Err(e) =
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
            {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
