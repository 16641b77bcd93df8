use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dcnet_cli::{load_config, run, Command};

#[derive(Parser)]
#[command(name = "dcnet", version, about = "Data-consistent network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw phantoms and data.
    Phantom(Args),
    /// Train the networks of the experiment.
    Train(Args),
    /// Score every method on the test sets.
    Evaluate(Args),
    /// Rate or convergence study.
    Rates(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (cmd, args) = match cli.command {
        Cmd::Phantom(a) => (Command::Phantom, a),
        Cmd::Train(a) => (Command::Train, a),
        Cmd::Evaluate(a) => (Command::Evaluate, a),
        Cmd::Rates(a) => (Command::Rates, a),
    };
    let result = load_config(&args.config, args.seed, args.out).and_then(|cfg| run(cmd, &cfg));
    match result {
        Ok(m) => {
            println!("{} finished in {:.1} s, {} files", m.command, m.wall_clock_seconds, m.checksums.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
