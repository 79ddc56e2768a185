//! `dtsnn`: train, evaluate, quantize and simulate spiking networks.

mod commands;
mod config;
mod dataset;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "dtsnn", version, about, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one configuration key; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_assignment)]
    set: Vec<(String, String)>,
    /// Model preset (mlp-128, mlp-256, mlp-1024, conv, nmnist-mlp, bar-mlp).
    #[arg(long)]
    preset: Option<String>,
    /// Dataset directory.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Output directory; nothing is written outside it.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fill the wall_clock metrics column.
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a preset and write checkpoints and per-epoch metrics.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Accuracy against the number of time steps, averaged over trials.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        /// Repetitions per test image with fresh input encodings.
        #[arg(long)]
        trials: Option<usize>,
        /// Single-step readout: potential | vote.
        #[arg(long)]
        readout: Option<String>,
    },
    /// Quantize a checkpoint to integer weights, optionally sweeping bit widths.
    Quantize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        bits: Option<u8>,
        /// Comma-separated bit widths; bare flag sweeps 2..=8.
        #[arg(long, value_name = "LIST", num_args = 0..=1, default_missing_value = "2,3,4,5,6,7,8")]
        sweep: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Cycle-level simulation of a quantized model on test inputs.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Quantized model file written by `quantize`.
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Energy coefficients as `key = value` lines.
        #[arg(long, value_name = "FILE")]
        coefficients: Option<PathBuf>,
        /// Write one per-cycle trace file per sample.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
}

fn parse_assignment(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))
}

fn opt<T: ToString>(key: &str, v: &Option<T>) -> Option<(String, String)> {
    v.as_ref().map(|v| (key.to_owned(), v.to_string()))
}

impl Common {
    /// Flag values as overrides; `--set` entries come last and win.
    fn overrides(&self, extra: Vec<Option<(String, String)>>) -> Vec<(String, String)> {
        let mut out: Vec<_> = [
            opt("preset", &self.preset),
            opt("data", &self.data.as_ref().map(|p| p.display().to_string())),
            opt("out", &self.out.as_ref().map(|p| p.display().to_string())),
            opt("seed", &self.seed),
            self.timing
                .then(|| ("timing".to_owned(), "true".to_owned())),
        ]
        .into_iter()
        .chain(extra)
        .flatten()
        .collect();
        out.extend(self.set.iter().cloned());
        out
    }

    fn load(&self, extra: Vec<Option<(String, String)>>) -> anyhow::Result<config::RunConfig> {
        config::RunConfig::load(self.config.as_deref(), &self.overrides(extra))
    }
}

fn path_str(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { common, epochs } => {
            let cfg = common.load(vec![opt("epochs", &epochs)])?;
            commands::train(cfg)
        }
        Command::Eval {
            common,
            checkpoint,
            steps,
            trials,
            readout,
        } => {
            let cfg = common.load(vec![
                opt("checkpoint", &path_str(&checkpoint)),
                opt("steps", &steps),
                opt("trials", &trials),
                opt("readout", &readout),
            ])?;
            commands::eval(cfg)
        }
        Command::Quantize {
            common,
            checkpoint,
            bits,
            sweep,
            steps,
            trials,
        } => {
            let cfg = common.load(vec![
                opt("checkpoint", &path_str(&checkpoint)),
                opt("bits", &bits),
                opt("sweep", &sweep),
                opt("steps", &steps),
                opt("trials", &trials),
            ])?;
            commands::quantize(cfg)
        }
        Command::Simulate {
            common,
            model,
            coefficients,
            trace,
            samples,
            steps,
        } => {
            let cfg = common.load(vec![
                opt("model", &path_str(&model)),
                opt("coefficients", &path_str(&coefficients)),
                trace.then(|| ("trace".to_owned(), "true".to_owned())),
                opt("samples", &samples),
                opt("steps", &steps),
            ])?;
            commands::simulate(cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
