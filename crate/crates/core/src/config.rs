//! Experiment configuration: a flat key = value TOML file, overridable
//! from the command line, hashed into every output artifact.

use crate::datagen::{ProblemId, ProblemSpec};
use crate::error::{Error, Result};
use crate::nn::{Activation, AdamConfig};
use crate::rng::{stream, substream};
use crate::scheme::SchemeConfig;
use crate::sim::{ClusterConfig, ErasureModel};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// One of eig | eigvec | expm | det.
    pub problem: String,
    pub m: usize,
    pub k: usize,
    pub g: usize,
    pub p: usize,
    pub hidden: Vec<usize>,
    /// relu | tanh.
    pub activation: String,
    /// Anchor scalars; empty means the k/K default.
    pub betas: Vec<f64>,

    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub batch_size: usize,
    /// per-batch | per-epoch.
    pub update_mode: String,
    pub base_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub decay_rate: f64,
    pub decay_steps: u64,

    /// Worker count; 0 means exactly the recovery threshold.
    pub workers: usize,
    /// Number of erased workers (a seeded subset). Ignored when
    /// `erased_workers` or `erasure_probability` is set.
    pub erasures: usize,
    /// Explicit erased worker indices; takes precedence.
    pub erased_workers: Vec<usize>,
    /// Independent per-worker erasure probability; 0 disables.
    pub erasure_probability: f64,
    pub base_delay: f64,
    pub jitter_mean: f64,

    pub eval_instances: usize,
    pub bench_batches: usize,
    pub bench_repetitions: usize,
    /// square | cube | square-plus-x.
    pub lcc_function: String,

    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "det".into(),
            m: 10,
            k: 3,
            g: 2,
            p: 2,
            hidden: vec![100, 100],
            activation: "relu".into(),
            betas: Vec::new(),
            epochs: 50,
            batches_per_epoch: 20,
            batch_size: 16,
            update_mode: "per-batch".into(),
            base_lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            decay_rate: 0.96,
            decay_steps: 1000,
            workers: 0,
            erasures: 0,
            erased_workers: Vec::new(),
            erasure_probability: 0.0,
            base_delay: 1.0,
            jitter_mean: 0.5,
            eval_instances: 64,
            bench_batches: 128,
            bench_repetitions: 10,
            lcc_function: "square".into(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }

    /// Short content hash stamped into every output artifact.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn problem_id(&self) -> Result<ProblemId> {
        ProblemId::parse(&self.problem)
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        Ok(ProblemSpec::new(self.problem_id()?, self.m))
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let problem = self.problem_spec()?;
        let mut cfg = SchemeConfig::new(self.m, self.k, self.g, self.p, problem.output_dim())
            .with_hidden(self.hidden.clone())
            .with_activation(Activation::parse(&self.activation)?);
        if !self.betas.is_empty() {
            cfg = cfg.with_betas(self.betas.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn adam_config(&self) -> AdamConfig {
        AdamConfig {
            base_lr: self.base_lr,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            decay_rate: self.decay_rate,
            decay_steps: self.decay_steps,
        }
    }

    pub fn per_epoch_update(&self) -> Result<bool> {
        match self.update_mode.as_str() {
            "per-batch" => Ok(false),
            "per-epoch" => Ok(true),
            other => Err(Error::Config(format!(
                "unknown update_mode '{other}' (expected per-batch|per-epoch)"
            ))),
        }
    }

    /// Worker count; defaults to the recovery threshold when unset.
    pub fn n_workers(&self, recovery_threshold: usize) -> usize {
        if self.workers == 0 {
            recovery_threshold
        } else {
            self.workers
        }
    }

    /// Builds the cluster model. Precedence: explicit worker list, then
    /// erasure probability, then a seeded subset of `erasures` workers.
    pub fn cluster_config(&self, n_workers: usize) -> ClusterConfig {
        let erasure = if !self.erased_workers.is_empty() {
            ErasureModel::Explicit {
                workers: self.erased_workers.clone(),
            }
        } else if self.erasure_probability > 0.0 {
            ErasureModel::Probability {
                p: self.erasure_probability,
            }
        } else if self.erasures > 0 {
            ErasureModel::Explicit {
                workers: seeded_subset(self.seed, n_workers, self.erasures),
            }
        } else {
            ErasureModel::None
        };
        ClusterConfig {
            n_workers,
            base_delay: self.base_delay,
            jitter_mean: self.jitter_mean,
            erasure,
            seed: self.seed,
        }
    }
}

/// Deterministic choice of `count` distinct workers out of `n`.
pub fn seeded_subset(seed: u64, n: usize, count: usize) -> Vec<usize> {
    use rand::Rng;
    let mut rng = substream(seed, &[stream::SIM, 0x5e1ec7]);
    let mut pool: Vec<usize> = (0..n).collect();
    let count = count.min(n);
    for i in 0..count {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut chosen = pool[..count].to_vec();
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_is_lossless() {
        let cfg = RunConfig {
            problem: "eig".into(),
            m: 7,
            betas: vec![0.25, 0.5, 0.75],
            erased_workers: vec![1, 3],
            ..RunConfig::default()
        };
        let text = cfg.to_toml();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn hash_changes_with_content() {
        let a = RunConfig::default();
        let b = RunConfig {
            seed: 1,
            ..RunConfig::default()
        };
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), RunConfig::default().hash());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = toml::from_str::<RunConfig>("problme = \"det\"\n");
        assert!(err.is_err());
    }

    #[test]
    fn scheme_config_derives_output_dim() {
        let cfg = RunConfig {
            problem: "expm".into(),
            m: 4,
            ..RunConfig::default()
        };
        let scheme = cfg.scheme_config().unwrap();
        assert_eq!(scheme.v, 16);
        assert_eq!(scheme.recovery_threshold(), 5);
    }

    #[test]
    fn seeded_subset_is_deterministic_and_distinct() {
        let a = seeded_subset(9, 10, 4);
        let b = seeded_subset(9, 10, 4);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        let mut dedup = a.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 4);
    }

    #[test]
    fn workers_default_to_threshold() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.n_workers(5), 5);
        let mut cfg2 = cfg.clone();
        cfg2.workers = 9;
        assert_eq!(cfg2.n_workers(5), 9);
    }
}
