//! The experiment harness behind the CLI subcommands. Every command is
//! deterministic given (config, seed); every output artifact starts with a
//! comment row carrying the config hash and seed.

use crate::checkpoint::{load_scheme, save_scheme};
use crate::config::{seeded_subset, RunConfig};
use crate::datagen::make_batch;
use crate::error::{Error, Result};
use crate::lcc::LccFunction;
use crate::linalg::Matrix;
use crate::rng::{stream, substream};
use crate::scheme::{
    decode, default_alphas, derive_computation_coeffs, derive_encoder_coeffs, encode, train_scheme,
    worker_compute, NanAbort, SchemeConfig, SchemeParams, TrainOptions, TrainOutcome, WorkerResult,
};
use crate::sim::{run_learned, ClusterConfig, ErasureModel, RunTranscript};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Table I of the reference evaluation (percent NRMSE at M=50, K=3, R=5),
/// emitted as metadata in eval outputs. Never asserted.
pub const REFERENCE_NRMSE_PCT: [(&str, f64); 4] = [
    ("eig", 4.64),
    ("eigvec", 5.81),
    ("expm", 7.85),
    ("det", 1.50),
];

fn csv_writer(path: &Path, cfg: &RunConfig, header: &str) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# config_hash={} seed={}", cfg.hash(), cfg.seed)?;
    writeln!(w, "{header}")?;
    Ok(w)
}

pub struct TrainSummary {
    pub checkpoint_path: PathBuf,
    pub curve_path: PathBuf,
    pub best_epoch: Option<usize>,
    pub best_loss: f64,
    pub epoch_losses: Vec<f64>,
    /// Present when training stopped on a non-finite loss/gradient; the
    /// checkpoint then holds the last good parameters.
    pub aborted: Option<NanAbort>,
}

fn run_training(cfg: &RunConfig) -> Result<(SchemeConfig, TrainOutcome)> {
    let scheme_cfg = cfg.scheme_config()?;
    let problem = cfg.problem_spec()?;
    let opts = TrainOptions {
        epochs: cfg.epochs,
        batches_per_epoch: cfg.batches_per_epoch,
        batch_size: cfg.batch_size,
        adam: cfg.adam_config(),
        per_epoch_update: cfg.per_epoch_update()?,
    };
    let outcome = train_scheme(&scheme_cfg, &problem, &opts, cfg.seed)?;
    Ok((scheme_cfg, outcome))
}

/// Trains, writes the loss curve CSV, and checkpoints the epoch with
/// minimum loss (the initialization when no epoch ran).
pub fn cmd_train(
    cfg: &RunConfig,
    out_dir: &Path,
    checkpoint_path: Option<&Path>,
) -> Result<TrainSummary> {
    std::fs::create_dir_all(out_dir)?;
    let (scheme_cfg, outcome) = run_training(cfg)?;

    let curve_path = out_dir.join("loss_curve.csv");
    let mut w = csv_writer(&curve_path, cfg, "epoch,mean_loss")?;
    for (epoch, loss) in outcome.epoch_losses.iter().enumerate() {
        writeln!(w, "{epoch},{loss}")?;
    }
    drop(w);

    let checkpoint_path = checkpoint_path
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| out_dir.join("checkpoint.ckpt"));
    save_scheme(&checkpoint_path, &scheme_cfg, &outcome.params)?;

    Ok(TrainSummary {
        checkpoint_path,
        curve_path,
        best_epoch: outcome.best_epoch,
        best_loss: outcome.best_loss,
        epoch_losses: outcome.epoch_losses,
        aborted: outcome.aborted,
    })
}

/// One evaluated anchor: instance index, anchor index, relative error.
pub struct EvalRow {
    pub instance: usize,
    pub anchor: usize,
    pub nrmse: f64,
}

pub struct EvalStats {
    pub rows: Vec<EvalRow>,
    /// Instance indices whose run fell below the recovery threshold.
    pub failed_instances: Vec<usize>,
    pub transcripts: Vec<RunTranscript>,
}

impl EvalStats {
    pub fn mean_nrmse(&self) -> f64 {
        if self.rows.is_empty() {
            return f64::NAN;
        }
        self.rows.iter().map(|r| r.nrmse).sum::<f64>() / self.rows.len() as f64
    }

    pub fn std_nrmse(&self) -> f64 {
        if self.rows.len() < 2 {
            return 0.0;
        }
        let mean = self.mean_nrmse();
        let var = self
            .rows
            .iter()
            .map(|r| (r.nrmse - mean) * (r.nrmse - mean))
            .sum::<f64>()
            / (self.rows.len() - 1) as f64;
        var.sqrt()
    }
}

/// Evaluates trained parameters on fresh test data through the full
/// encode → simulate → decode path. NRMSE per anchor is
/// ‖f̂_k − f(X_k)‖ / ‖f(X_k)‖.
pub fn run_eval(
    cfg: &RunConfig,
    scheme_cfg: &SchemeConfig,
    params: &SchemeParams,
) -> Result<EvalStats> {
    let problem = cfg.problem_spec()?;
    if problem.output_dim() != scheme_cfg.v {
        return Err(Error::Config(format!(
            "checkpoint output dimension {} does not fit problem '{}' at m={}",
            scheme_cfg.v, cfg.problem, cfg.m
        )));
    }
    let n_workers = cfg.n_workers(scheme_cfg.recovery_threshold());
    let instances = make_batch(
        &problem,
        scheme_cfg.k,
        cfg.eval_instances,
        cfg.seed,
        &[stream::EVAL],
    )?;

    let mut rows = Vec::new();
    let mut transcripts = Vec::new();
    let mut failed_instances = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        // Latency/erasure draws vary per instance; explicit erasure sets
        // stay fixed by construction.
        let mut cluster = cfg.cluster_config(n_workers);
        cluster.seed = cfg.seed.wrapping_add(i as u64);
        match run_learned(params, scheme_cfg, &inst.inputs, &cluster) {
            Ok((decoded, transcript)) => {
                for (k, (f_hat, target)) in decoded.iter().zip(inst.targets.iter()).enumerate() {
                    let denom = target.norm();
                    let nrmse = f_hat.sub(target)?.norm() / denom.max(f64::MIN_POSITIVE);
                    rows.push(EvalRow {
                        instance: i,
                        anchor: k,
                        nrmse,
                    });
                }
                transcripts.push(transcript);
            }
            Err(Error::DecodeFailure { transcript, .. }) => {
                failed_instances.push(i);
                transcripts.push(*transcript);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EvalStats {
        rows,
        failed_instances,
        transcripts,
    })
}

pub struct EvalSummary {
    pub metrics_path: PathBuf,
    pub transcripts_path: PathBuf,
    pub mean_nrmse: f64,
    pub std_nrmse: f64,
    pub rows: usize,
    pub decode_failures: usize,
}

/// Writes the evaluation dataset (inputs, targets, seed coordinates) as
/// CSV, using the same substreams `run_eval` draws from.
pub fn dump_eval_data(cfg: &RunConfig, path: &Path) -> Result<()> {
    let problem = cfg.problem_spec()?;
    let batch = make_batch(
        &problem,
        cfg.k,
        cfg.eval_instances,
        cfg.seed,
        &[stream::EVAL],
    )?;
    let file = File::create(path)?;
    crate::datagen::write_batch_csv(BufWriter::new(file), &batch, cfg.seed, &[stream::EVAL])
}

/// Loads a checkpoint, evaluates it, and writes per-anchor metrics plus
/// the run transcripts.
pub fn cmd_eval(cfg: &RunConfig, checkpoint: &Path, out_dir: &Path) -> Result<EvalSummary> {
    std::fs::create_dir_all(out_dir)?;
    let (scheme_cfg, params) = load_scheme(checkpoint)?;
    let stats = run_eval(cfg, &scheme_cfg, &params)?;

    let metrics_path = out_dir.join("metrics.csv");
    let mut w = csv_writer(&metrics_path, cfg, "instance,anchor,status,nrmse")?;
    let reference: Vec<String> = REFERENCE_NRMSE_PCT
        .iter()
        .map(|(name, pct)| format!("{name}={pct}"))
        .collect();
    writeln!(
        w,
        "# reference_nrmse_pct {} (reported at m=50 k=3 r=5; metadata only)",
        reference.join(" ")
    )?;
    for row in &stats.rows {
        writeln!(w, "{},{},ok,{}", row.instance, row.anchor, row.nrmse)?;
    }
    for &i in &stats.failed_instances {
        writeln!(w, "{i},,decode-failure,")?;
    }
    writeln!(
        w,
        "# mean_nrmse={} std_nrmse={}",
        stats.mean_nrmse(),
        stats.std_nrmse()
    )?;
    drop(w);

    let transcripts_path = out_dir.join("transcripts.json");
    let json =
        serde_json::to_string_pretty(&stats.transcripts).expect("transcripts always serialize");
    std::fs::write(&transcripts_path, json)?;

    Ok(EvalSummary {
        metrics_path,
        transcripts_path,
        mean_nrmse: stats.mean_nrmse(),
        std_nrmse: stats.std_nrmse(),
        rows: stats.rows.len(),
        decode_failures: stats.failed_instances.len(),
    })
}

/// Sweep axis: matrix dimension, input count, or recovery threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    M,
    K,
    R,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "m" | "M" => Ok(SweepAxis::M),
            "k" | "K" => Ok(SweepAxis::K),
            "r" | "R" => Ok(SweepAxis::R),
            other => Err(Error::Config(format!(
                "unknown sweep axis '{other}' (expected m|k|r)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::K => "k",
            SweepAxis::R => "r",
        }
    }
}

/// Derives the per-point config. Sweeping R keeps P fixed and solves
/// G = (R−1)/P, so R−1 must be divisible by P.
pub fn sweep_point(cfg: &RunConfig, axis: SweepAxis, value: usize) -> Result<RunConfig> {
    let mut point = cfg.clone();
    match axis {
        SweepAxis::M => point.m = value,
        SweepAxis::K => point.k = value,
        SweepAxis::R => {
            if value == 0 || !(value - 1).is_multiple_of(cfg.p) {
                return Err(Error::Config(format!(
                    "cannot reach recovery threshold {value} with p={}: need (r-1) divisible by p",
                    cfg.p
                )));
            }
            point.g = (value - 1) / cfg.p;
        }
    }
    Ok(point)
}

/// Trains and evaluates one configuration per axis value; one CSV row per
/// point.
pub fn cmd_sweep(
    cfg: &RunConfig,
    axis: SweepAxis,
    values: &[usize],
    out_dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let sweep_path = out_dir.join("sweep.csv");
    let mut w = csv_writer(
        &sweep_path,
        cfg,
        "axis,value,problem,m,k,g,p,r,best_epoch,best_loss,mean_nrmse,std_nrmse,decode_failures,train_seconds",
    )?;
    for &value in values {
        let point = sweep_point(cfg, axis, value)?;
        let started = Instant::now();
        let (scheme_cfg, outcome) = run_training(&point)?;
        if let Some(abort) = outcome.aborted {
            return Err(Error::NanLoss {
                epoch: abort.epoch,
                batch: abort.batch,
            });
        }
        let train_seconds = started.elapsed().as_secs_f64();
        let stats = run_eval(&point, &scheme_cfg, &outcome.params)?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            axis.name(),
            value,
            point.problem,
            point.m,
            point.k,
            point.g,
            point.p,
            scheme_cfg.recovery_threshold(),
            outcome
                .best_epoch
                .map(|e| e.to_string())
                .unwrap_or_default(),
            outcome.best_loss,
            stats.mean_nrmse(),
            stats.std_nrmse(),
            stats.failed_instances.len(),
            train_seconds,
        )?;
    }
    Ok(sweep_path)
}

/// Times the coded inference path (coefficient generation, N worker
/// computations, decode) against direct oracle evaluation on the same
/// inputs. Timings are reported, never asserted.
pub fn cmd_bench(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let scheme_cfg = cfg.scheme_config()?;
    let problem = cfg.problem_spec()?;
    let params = SchemeParams::init(&scheme_cfg, cfg.seed);
    let n_workers = cfg.n_workers(scheme_cfg.recovery_threshold());
    let alphas = default_alphas(n_workers);
    let threshold = scheme_cfg.recovery_threshold();

    // Pre-sample every batch so only compute is timed.
    let mut batches = Vec::with_capacity(cfg.bench_batches);
    for b in 0..cfg.bench_batches {
        let mut rng = substream(cfg.seed, &[stream::BENCH, b as u64]);
        let inputs: Vec<Matrix> = (0..scheme_cfg.k)
            .map(|_| {
                use rand::Rng;
                Matrix::from_fn(scheme_cfg.m, scheme_cfg.m, |_, _| {
                    rng.random_range(0.0..1.0)
                })
            })
            .collect();
        batches.push(inputs);
    }
    // The coded path works on any square inputs; the direct path needs
    // the problem's own distribution for oracle stability, so it draws
    // from the sampler instead.
    let mut oracle_batches = Vec::with_capacity(cfg.bench_batches);
    for b in 0..cfg.bench_batches {
        let mut rng = substream(cfg.seed, &[stream::BENCH, b as u64, 1]);
        let inputs: Vec<Matrix> = (0..scheme_cfg.k)
            .map(|_| problem.sample(&mut rng))
            .collect::<Result<_>>()?;
        oracle_batches.push(inputs);
    }

    let mut coded_times = Vec::with_capacity(cfg.bench_repetitions);
    let mut direct_times = Vec::with_capacity(cfg.bench_repetitions);
    for _ in 0..cfg.bench_repetitions.max(1) {
        let t = Instant::now();
        for inputs in &batches {
            let enc = derive_encoder_coeffs(&params.encoders, inputs, &scheme_cfg)?;
            let comp =
                derive_computation_coeffs(&params.lambda0, &params.v_rest, inputs, &scheme_cfg)?;
            let results: Vec<WorkerResult> = alphas
                .iter()
                .map(|&a| {
                    Ok(WorkerResult {
                        alpha: a,
                        y: worker_compute(&comp, &encode(&enc, a))?,
                    })
                })
                .collect::<Result<_>>()?;
            let _ = decode(&results[..threshold.min(results.len())], &scheme_cfg)?;
        }
        coded_times.push(t.elapsed().as_secs_f64());

        let t = Instant::now();
        for inputs in &oracle_batches {
            for x in inputs {
                let _ = problem.oracle(x)?;
            }
        }
        direct_times.push(t.elapsed().as_secs_f64());
    }

    let bench_path = out_dir.join("bench.csv");
    let mut w = csv_writer(
        &bench_path,
        cfg,
        "scheme,problem,m,k,n_workers,batches,repetitions,mean_seconds,seconds_per_batch",
    )?;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    for (name, times) in [("coded", &coded_times), ("direct", &direct_times)] {
        let mean_seconds = mean(times);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            name,
            cfg.problem,
            scheme_cfg.m,
            scheme_cfg.k,
            n_workers,
            cfg.bench_batches,
            cfg.bench_repetitions.max(1),
            mean_seconds,
            mean_seconds / cfg.bench_batches as f64,
        )?;
    }
    Ok(bench_path)
}

/// Runs the exact LCC baseline across erasure budgets 0..=`erasures` and
/// reports the worst relative recovery error per budget. A budget that
/// drops below the threshold yields a failure row, never an estimate.
pub fn cmd_lcc(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let f = LccFunction::parse(&cfg.lcc_function)?;
    let threshold = crate::lcc::lcc_recovery_threshold(cfg.k, f.degree());
    let n_workers = cfg.n_workers(threshold);

    // Inputs: uniform [0,1] square matrices; LCC is distribution-free.
    let mut instance_sets = Vec::with_capacity(cfg.eval_instances.max(1));
    for i in 0..cfg.eval_instances.max(1) {
        let mut rng = substream(cfg.seed, &[stream::EVAL, 0x1cc, i as u64]);
        let inputs: Vec<Matrix> = (0..cfg.k)
            .map(|_| {
                use rand::Rng;
                Matrix::from_fn(cfg.m, cfg.m, |_, _| rng.random_range(0.0..1.0))
            })
            .collect();
        instance_sets.push(inputs);
    }

    let lcc_path = out_dir.join("lcc.csv");
    let mut w = csv_writer(
        &lcc_path,
        cfg,
        "function,m,k,n_workers,threshold,erased,status,max_rel_error",
    )?;
    for erased in 0..=cfg.erasures {
        let erasure = if erased == 0 {
            ErasureModel::None
        } else {
            ErasureModel::Explicit {
                workers: seeded_subset(cfg.seed.wrapping_add(erased as u64), n_workers, erased),
            }
        };
        let cluster = ClusterConfig {
            n_workers,
            base_delay: cfg.base_delay,
            jitter_mean: cfg.jitter_mean,
            erasure,
            seed: cfg.seed,
        };
        let mut max_rel: f64 = 0.0;
        let mut failed = false;
        for inputs in &instance_sets {
            match crate::sim::run_lcc(f, inputs, &cluster) {
                Ok((decoded, _)) => {
                    for (d, x) in decoded.iter().zip(inputs.iter()) {
                        let expected = f.apply(x)?;
                        let rel = d.sub(&expected)?.frobenius_norm()
                            / expected.frobenius_norm().max(f64::MIN_POSITIVE);
                        max_rel = max_rel.max(rel);
                    }
                }
                Err(Error::DecodeFailure { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            writeln!(
                w,
                "{},{},{},{},{},{},decode-failure,",
                f.cli_name(),
                cfg.m,
                cfg.k,
                n_workers,
                threshold,
                erased
            )?;
        } else {
            writeln!(
                w,
                "{},{},{},{},{},{},ok,{}",
                f.cli_name(),
                cfg.m,
                cfg.k,
                n_workers,
                threshold,
                erased,
                max_rel
            )?;
        }
    }
    Ok(lcc_path)
}
