//! A sweep over ring sizes at fixed density, rendered as CSV.

use clap::Parser;
use qboson::cli::{render_csv, sweep_rows, Cli, Command};

fn main() -> anyhow::Result<()> {
    let cli = Cli::try_parse_from([
        "qboson", "sweep", "--n", "8,16,32", "--rho", "1", "--q", "0.5",
    ])?;
    let Some(Command::Sweep(args)) = cli.command else {
        anyhow::bail!("expected a sweep command");
    };
    print!("{}", render_csv(&sweep_rows(&args)?));
    Ok(())
}
