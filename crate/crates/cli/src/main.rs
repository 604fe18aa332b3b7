use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ghz_comm::Error;
use ghz_comm_cli::commands::{cmd_demo, cmd_replay, cmd_search, cmd_verify, SearchScope, VerifyScope, VERIFY_MAX_N};
use ghz_comm_cli::report::Format;

/// GHZ promise-function communication complexity: protocols and lower bounds.
#[derive(Parser, Debug)]
#[command(name = "ghz-comm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// RNG seed; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every protocol on one random promise triple.
    Demo {
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=32))]
        n: u8,
    },
    /// Exhaustive correctness checks.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyScope::All)]
        scope: VerifyScope,
        /// Largest input length to enumerate.
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(1..=VERIFY_MAX_N as i64))]
        n: u8,
    },
    /// Exhaustive lower-bound searches.
    Search {
        #[arg(long, value_enum, default_value_t = SearchScope::Paper)]
        scope: SearchScope,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        workers: u16,
    },
    /// Replay a lower-bound case (e.g. 2.1.3) or all of them.
    Replay {
        #[arg(long, default_value = "all")]
        scope: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match cli.command {
        Command::Demo { n } => cmd_demo(n as usize, cli.seed),
        Command::Verify { scope, n } => cmd_verify(scope, n as usize, cli.seed),
        Command::Search { scope, workers } => cmd_search(scope, workers as usize, cli.seed),
        Command::Replay { scope } => cmd_replay(&scope, cli.seed),
    };
    let report = match report {
        Ok(r) => r,
        Err(e @ Error::UnknownCase(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let format = match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Machine => Format::Machine,
    };
    let rendered = report.render(format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
