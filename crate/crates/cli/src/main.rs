//! `coalition-attr`: feature attribution from cooperative games.

mod attribute;
mod bench;
mod error;
mod io;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use coalition_core::dividends::dividends_fast;

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "coalition-attr", version, about = "Game-theoretic feature attribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    Attribute(Box<attribute::AttributeArgs>),
    Dividends(DividendsArgs),
    Verify(verify::VerifyArgs),
    PaperBench(bench::BenchArgs),
}

/// Harsanyi dividends of a game, with the checksum that they sum to v(D).
#[derive(Args, Debug)]
struct DividendsArgs {
    /// Game JSON file.
    game: PathBuf,
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn dividends(args: &DividendsArgs) -> CliResult<()> {
    let g = io::load_game(&args.game)?;
    let table = dividends_fast(&g);
    let report = json!({
        "d": table.players(),
        "dividends": table.dividends(),
        "checksum": table.total(),
        "v_full": g.v_full(),
    });
    io::emit(args.output.as_deref(), &(serde_json::to_string_pretty(&report).expect("serializes") + "\n"))
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("COALITION_ATTR_THREADS") else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(CliError::Config(format!("COALITION_ATTR_THREADS={raw:?} is not a positive integer"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> CliResult<bool> {
    configure_threads()?;
    match &cli.command {
        Command::Attribute(a) => attribute::run(a).map(|_| true),
        Command::Dividends(a) => dividends(a).map(|_| true),
        Command::Verify(a) => verify::run(a),
        Command::PaperBench(a) => bench::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("coalition-attr: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
