//! Command-line front door: training runs, evaluation, parameter sweeps,
//! runtime benchmarks, and the exact LCC baseline.

use clap::{Args, Parser, Subcommand};
use codedcomp::commands::{cmd_bench, cmd_eval, cmd_lcc, cmd_sweep, cmd_train, SweepAxis};
use codedcomp::config::RunConfig;
use codedcomp::error::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "codedcomp",
    version,
    about = "Coded distributed computation of matrix functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each one overrides the same-named
/// config-file key.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// Config file (flat key = value TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, value_name = "DIR", default_value = "runs")]
    out: PathBuf,
    /// Checkpoint path (written by train, read by eval).
    #[arg(long, value_name = "PATH")]
    checkpoint: Option<PathBuf>,
    /// Target problem: eig | eigvec | expm | det.
    #[arg(long)]
    problem: Option<String>,
    /// Matrix dimension M.
    #[arg(long)]
    m: Option<usize>,
    /// Number of inputs K.
    #[arg(long)]
    k: Option<usize>,
    /// Encoder polynomial degree G.
    #[arg(long)]
    g: Option<usize>,
    /// Computation polynomial degree P.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Worker count N (0 = exactly the recovery threshold).
    #[arg(long)]
    workers: Option<usize>,
    /// Number of erased workers (seeded subset).
    #[arg(long)]
    erasures: Option<usize>,
}

impl Overrides {
    fn build_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(problem) = &self.problem {
            cfg.problem = problem.clone();
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(g) = self.g {
            cfg.g = g;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(epochs) = self.epochs {
            cfg.epochs = epochs;
        }
        if let Some(batch_size) = self.batch_size {
            cfg.batch_size = batch_size;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        if let Some(erasures) = self.erasures {
            cfg.erasures = erasures;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a scheme and checkpoint the best epoch.
    Train {
        #[command(flatten)]
        common: Overrides,
    },
    /// Evaluate a checkpoint on fresh data through the full simulated path.
    Eval {
        #[command(flatten)]
        common: Overrides,
        /// Also dump the evaluation dataset (inputs, targets, seed
        /// coordinates) to this CSV path.
        #[arg(long, value_name = "PATH")]
        dump_data: Option<PathBuf>,
    },
    /// Train + evaluate across one axis (m | k | r).
    Sweep {
        #[command(flatten)]
        common: Overrides,
        /// Sweep axis: m | k | r.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values, e.g. 5,10,15.
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
    },
    /// Time coded inference against direct oracle computation.
    Bench {
        #[command(flatten)]
        common: Overrides,
    },
    /// Exercise the exact LCC baseline across erasure budgets.
    Lcc {
        #[command(flatten)]
        common: Overrides,
    },
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train { common } => {
            let cfg = common.build_config()?;
            let summary = cmd_train(&cfg, &common.out, common.checkpoint.as_deref())?;
            println!(
                "trained {} epochs (best epoch {}, best loss {:.6})",
                summary.epoch_losses.len(),
                summary
                    .best_epoch
                    .map(|e| e.to_string())
                    .unwrap_or_else(|| "-".into()),
                summary.best_loss,
            );
            println!("loss curve: {}", summary.curve_path.display());
            println!("checkpoint: {}", summary.checkpoint_path.display());
            if let Some(abort) = summary.aborted {
                return Err(Error::NanLoss {
                    epoch: abort.epoch,
                    batch: abort.batch,
                });
            }
            Ok(())
        }
        Command::Eval { common, dump_data } => {
            let cfg = common.build_config()?;
            let checkpoint = common
                .checkpoint
                .clone()
                .ok_or_else(|| Error::Config("eval requires --checkpoint".into()))?;
            if let Some(path) = &dump_data {
                codedcomp::commands::dump_eval_data(&cfg, path)?;
                println!("dataset dump: {}", path.display());
            }
            let summary = cmd_eval(&cfg, &checkpoint, &common.out)?;
            println!(
                "evaluated {} anchors: mean NRMSE {:.4} (std {:.4}), {} decode failures",
                summary.rows, summary.mean_nrmse, summary.std_nrmse, summary.decode_failures
            );
            println!("metrics: {}", summary.metrics_path.display());
            println!("transcripts: {}", summary.transcripts_path.display());
            Ok(())
        }
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            let cfg = common.build_config()?;
            if values.is_empty() {
                return Err(Error::Config(
                    "sweep needs at least one --values entry".into(),
                ));
            }
            let axis = SweepAxis::parse(&axis)?;
            let path = cmd_sweep(&cfg, axis, &values, &common.out)?;
            println!("sweep results: {}", path.display());
            Ok(())
        }
        Command::Bench { common } => {
            let cfg = common.build_config()?;
            let path = cmd_bench(&cfg, &common.out)?;
            println!("bench results: {}", path.display());
            Ok(())
        }
        Command::Lcc { common } => {
            let cfg = common.build_config()?;
            let path = cmd_lcc(&cfg, &common.out)?;
            println!("lcc results: {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
