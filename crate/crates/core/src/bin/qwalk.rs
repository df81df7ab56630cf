use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qwalk::harness::{execute, Command, RunConfig};

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Quantum walk randomness sweeps and bit generation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Randomness against the initial coin angle.
    SweepDelta(#[command(flatten)] RunConfig),
    /// Randomness against step count for each walk family.
    SweepSteps(#[command(flatten)] RunConfig),
    /// Measurement vs von Neumann entropy under bit-flip noise.
    NoiseScan(#[command(flatten)] RunConfig),
    /// Compare one- and two-step closed forms with simulation.
    VerifyAnalytic(#[command(flatten)] RunConfig),
    /// Sample detections and write a committed bitstream.
    Genbits(#[command(flatten)] RunConfig),
    /// Run the test battery on a stream written by genbits.
    StatTest {
        input: PathBuf,
        #[command(flatten)]
        cfg: RunConfig,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (cmd, cfg, input) = match cli.cmd {
        Cmd::SweepDelta(c) => (Command::SweepDelta, c, None),
        Cmd::SweepSteps(c) => (Command::SweepSteps, c, None),
        Cmd::NoiseScan(c) => (Command::NoiseScan, c, None),
        Cmd::VerifyAnalytic(c) => (Command::VerifyAnalytic, c, None),
        Cmd::Genbits(c) => (Command::Genbits, c, None),
        Cmd::StatTest { input, cfg } => (Command::StatTest, cfg, Some(input)),
    };
    let result = cfg.resolve().and_then(|cfg| {
        execute(cmd, &cfg, input.as_deref(), &mut std::io::stdout().lock(), &mut std::io::stderr())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
