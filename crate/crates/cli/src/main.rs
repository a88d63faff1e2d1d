mod cli;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use cli::{Cli, Command};
use error::CliError;

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Build(_) => "build",
        Command::Search(_) => "search",
        Command::Bench(_) => "bench",
        Command::Tune(_) => "tune",
        Command::Analyze(_) => "analyze",
        Command::Generate(_) => "generate",
        Command::Diagnose(_) => "diagnose",
    }
}

fn fail(err: &CliError, subcommand: Option<&str>) -> ExitCode {
    eprintln!("error: {err}");
    if let CliError::Usage { help: true, .. } = err {
        let mut root = Cli::command();
        root.build();
        let usage = match subcommand.and_then(|s| root.find_subcommand_mut(s)) {
            Some(sub) => sub.render_usage(),
            None => Cli::command().render_usage(),
        };
        eprintln!("\n{usage}\n\nFor more information, try '--help'.");
    }
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    let args = match config::expand_config_file(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return fail(&e, None),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let name = subcommand_name(&cli.command);
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e, Some(name)),
    }
}
