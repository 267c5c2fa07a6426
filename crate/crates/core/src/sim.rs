//! Deterministic master/worker simulation: encode at all worker nodes,
//! simulate latency and erasures in logical time, decode from the earliest
//! R arrivals. No real clocks or sockets; a seeded run replays exactly.

use crate::error::{Error, Result};
use crate::lcc::{lcc_decode, lcc_encode, LccConfig, LccFunction, LccWorkerResult};
use crate::linalg::{Matrix, Vector};
use crate::rng::{stream, substream};
use crate::scheme::{
    decode, default_alphas, derive_computation_coeffs, derive_encoder_coeffs, encode,
    worker_compute, SchemeConfig, SchemeParams, WorkerResult,
};
use serde::{Deserialize, Serialize};

/// Which workers lose their result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ErasureModel {
    None,
    /// Each worker is erased independently with this probability.
    Probability {
        p: f64,
    },
    /// Exactly these worker indices are erased.
    Explicit {
        workers: Vec<usize>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub n_workers: usize,
    /// Logical latency floor shared by all workers.
    pub base_delay: f64,
    /// Mean of the exponential jitter added per worker (0 disables jitter).
    pub jitter_mean: f64,
    pub erasure: ErasureModel,
    pub seed: u64,
}

impl ClusterConfig {
    pub fn new(n_workers: usize, seed: u64) -> Self {
        ClusterConfig {
            n_workers,
            base_delay: 1.0,
            jitter_mean: 0.5,
            erasure: ErasureModel::None,
            seed,
        }
    }

    pub fn with_erasure(mut self, erasure: ErasureModel) -> Self {
        self.erasure = erasure;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let ErasureModel::Probability { p } = self.erasure {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "erasure probability {p} outside [0,1]"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of the delivery simulation, before any decoding.
pub struct Delivery {
    pub latencies: Vec<f64>,
    pub delivered: Vec<bool>,
    /// Delivered workers sorted by (latency, index).
    pub order: Vec<usize>,
}

/// Samples per-worker latency (base + exponential jitter) and erasures in
/// worker-index order from the cluster seed.
pub fn simulate_delivery(cluster: &ClusterConfig) -> Delivery {
    use rand::Rng;
    let mut rng = substream(cluster.seed, &[stream::SIM]);
    let n = cluster.n_workers;
    let mut latencies = Vec::with_capacity(n);
    let mut delivered = Vec::with_capacity(n);
    for i in 0..n {
        // One erasure draw and one jitter draw per worker regardless of
        // the model, so the stream layout is model-independent.
        let erase_draw: f64 = rng.random();
        let jitter_draw: f64 = rng.random();
        let erased = match &cluster.erasure {
            ErasureModel::None => false,
            ErasureModel::Probability { p } => erase_draw < *p,
            ErasureModel::Explicit { workers } => workers.contains(&i),
        };
        let jitter = if cluster.jitter_mean > 0.0 {
            -cluster.jitter_mean * (1.0 - jitter_draw).ln()
        } else {
            0.0
        };
        latencies.push(cluster.base_delay + jitter);
        delivered.push(!erased);
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| delivered[i]).collect();
    order.sort_by(|&a, &b| {
        latencies[a]
            .partial_cmp(&latencies[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    Delivery {
        latencies,
        delivered,
        order,
    }
}

/// The permutation of delivered workers by simulated arrival time.
pub fn arrival_order(cluster: &ClusterConfig) -> Vec<usize> {
    simulate_delivery(cluster).order
}

/// Per-worker dispatch record in a run transcript.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WorkerRecord {
    pub worker: usize,
    pub alpha: f64,
    pub latency: f64,
    pub delivered: bool,
    pub used: bool,
}

/// Full record of one simulated run. Field order is the JSON key order.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunTranscript {
    pub scheme: String,
    pub seed: u64,
    pub n_workers: usize,
    pub recovery_threshold: usize,
    pub workers: Vec<WorkerRecord>,
    /// The R workers feeding the decoder, in arrival order.
    pub used_workers: Vec<usize>,
    /// Simulated time at which the R-th result arrived; absent when the
    /// run never became decodable.
    pub completion_time: Option<f64>,
    /// Decoded outputs, one flattened vector per anchor; empty on failure.
    pub decode_output: Vec<Vec<f64>>,
}

impl RunTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript is always serializable")
    }
}

struct DispatchPlan {
    alphas: Vec<f64>,
    delivery: Delivery,
}

fn plan(cluster: &ClusterConfig) -> Result<DispatchPlan> {
    cluster.validate()?;
    Ok(DispatchPlan {
        alphas: default_alphas(cluster.n_workers),
        delivery: simulate_delivery(cluster),
    })
}

fn transcript_base(
    scheme: &str,
    cluster: &ClusterConfig,
    threshold: usize,
    plan: &DispatchPlan,
    used: &[usize],
) -> RunTranscript {
    let used_set: std::collections::HashSet<usize> = used.iter().copied().collect();
    let workers = (0..cluster.n_workers)
        .map(|i| WorkerRecord {
            worker: i,
            alpha: plan.alphas[i],
            latency: plan.delivery.latencies[i],
            delivered: plan.delivery.delivered[i],
            used: used_set.contains(&i),
        })
        .collect();
    let completion_time = used
        .iter()
        .map(|&i| plan.delivery.latencies[i])
        .fold(None, |acc: Option<f64>, t| {
            Some(acc.map_or(t, |a| a.max(t)))
        });
    RunTranscript {
        scheme: scheme.to_string(),
        seed: cluster.seed,
        n_workers: cluster.n_workers,
        recovery_threshold: threshold,
        workers,
        used_workers: used.to_vec(),
        completion_time,
        decode_output: Vec::new(),
    }
}

/// Runs the learned scheme end to end under the cluster model: encode at
/// all N nodes, compute everywhere, decode from the earliest R arrivals.
///
/// Fewer than R survivors is a decode failure carrying the transcript —
/// never a silent estimate.
pub fn run_learned(
    params: &SchemeParams,
    cfg: &SchemeConfig,
    inputs: &[Matrix],
    cluster: &ClusterConfig,
) -> Result<(Vec<Vector>, RunTranscript)> {
    let plan = plan(cluster)?;
    let threshold = cfg.recovery_threshold();

    let enc = derive_encoder_coeffs(&params.encoders, inputs, cfg)?;
    let comp = derive_computation_coeffs(&params.lambda0, &params.v_rest, inputs, cfg)?;
    let outputs: Vec<Vector> = plan
        .alphas
        .iter()
        .map(|&a| worker_compute(&comp, &encode(&enc, a)))
        .collect::<Result<_>>()?;

    let survivors = plan.delivery.order.len();
    if survivors < threshold {
        let transcript = transcript_base("learned", cluster, threshold, &plan, &[]);
        return Err(Error::DecodeFailure {
            survivors,
            needed: threshold,
            transcript: Box::new(transcript),
        });
    }
    let used: Vec<usize> = plan.delivery.order[..threshold].to_vec();
    let results: Vec<WorkerResult> = used
        .iter()
        .map(|&i| WorkerResult {
            alpha: plan.alphas[i],
            y: outputs[i].clone(),
        })
        .collect();
    let decoded = decode(&results, cfg)?;

    let mut transcript = transcript_base("learned", cluster, threshold, &plan, &used);
    transcript.decode_output = decoded.iter().map(|v| v.to_vec()).collect();
    Ok((decoded, transcript))
}

/// LCC counterpart of [`run_learned`]: exact recovery of f(X_k) whenever
/// at least (K−1)·deg(f)+1 workers survive.
pub fn run_lcc(
    f: LccFunction,
    inputs: &[Matrix],
    cluster: &ClusterConfig,
) -> Result<(Vec<Matrix>, RunTranscript)> {
    let plan = plan(cluster)?;
    let lcc_cfg = LccConfig {
        k: inputs.len(),
        degree: f.degree(),
        betas: crate::scheme::default_betas(inputs.len()),
        alphas: plan.alphas.clone(),
    };
    let threshold = lcc_cfg.recovery_threshold();

    let encoded = lcc_encode(inputs, &lcc_cfg)?;
    let outputs: Vec<Matrix> = encoded.iter().map(|x| f.apply(x)).collect::<Result<_>>()?;

    let survivors = plan.delivery.order.len();
    if survivors < threshold {
        let transcript = transcript_base("lcc", cluster, threshold, &plan, &[]);
        return Err(Error::DecodeFailure {
            survivors,
            needed: threshold,
            transcript: Box::new(transcript),
        });
    }
    let used: Vec<usize> = plan.delivery.order[..threshold].to_vec();
    let results: Vec<LccWorkerResult> = used
        .iter()
        .map(|&i| LccWorkerResult {
            alpha: plan.alphas[i],
            y: outputs[i].clone(),
        })
        .collect();
    let decoded = lcc_decode(&results, &lcc_cfg)?;

    let mut transcript = transcript_base("lcc", cluster, threshold, &plan, &used);
    transcript.decode_output = decoded.iter().map(|m| m.as_slice().to_vec()).collect();
    Ok((decoded, transcript))
}
