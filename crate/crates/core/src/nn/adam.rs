//! Adam optimizer with an exponentially decaying learning rate.

use super::mlp::MlpParams;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AdamConfig {
    pub base_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Learning-rate decay: lr = base_lr · decay_rate^(step/decay_steps).
    pub decay_rate: f64,
    pub decay_steps: u64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            base_lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            decay_rate: 0.96,
            decay_steps: 1000,
        }
    }
}

/// Moment accumulators over one flat parameter vector.
pub struct AdamState {
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
    cfg: AdamConfig,
}

impl AdamState {
    pub fn new(num_params: usize, cfg: AdamConfig) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            cfg,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Learning rate in effect for the next update.
    pub fn effective_lr(&self) -> f64 {
        self.cfg.base_lr
            * self
                .cfg
                .decay_rate
                .powf(self.step as f64 / self.cfg.decay_steps as f64)
    }

    /// One Adam update over the flat views. Rejects non-finite gradients.
    pub fn apply(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimMismatch {
                context: "optimizer parameter count",
                expected: self.m.len(),
                got: params.len().min(grads.len()),
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NanGradient {
                context: "adam update",
            });
        }
        let lr = self.effective_lr();
        let t = (self.step + 1) as f64;
        let bc1 = 1.0 - self.cfg.beta1.powf(t);
        let bc2 = 1.0 - self.cfg.beta2.powf(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.cfg.beta1 * self.m[i] + (1.0 - self.cfg.beta1) * g;
            self.v[i] = self.cfg.beta2 * self.v[i] + (1.0 - self.cfg.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.cfg.epsilon);
        }
        self.step += 1;
        Ok(())
    }
}

/// Adam update over a whole network's parameters.
pub fn adam_step(state: &mut AdamState, params: &mut MlpParams, grads: &MlpParams) -> Result<()> {
    let mut flat = params.to_flat();
    state.apply(&mut flat, &grads.to_flat())?;
    params.assign_from_flat(&flat)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut state = AdamState::new(3, AdamConfig::default());
        let mut params = vec![1.0, -2.0, 0.5];
        state.apply(&mut params, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_about_lr_against_gradient_sign() {
        let cfg = AdamConfig::default();
        let mut state = AdamState::new(1, cfg);
        let mut params = vec![0.0];
        state.apply(&mut params, &[4.2]).unwrap();
        // First Adam step ≈ -lr · sign(g)
        assert!((params[0] + cfg.base_lr).abs() < 1e-6, "got {}", params[0]);
    }

    #[test]
    fn converges_on_quadratic() {
        // f(x) = (x - 3)², minimizer at 3.
        let cfg = AdamConfig {
            base_lr: 0.05,
            decay_rate: 1.0,
            ..AdamConfig::default()
        };
        let mut state = AdamState::new(1, cfg);
        let mut x = vec![-1.0];
        for _ in 0..500 {
            let g = 2.0 * (x[0] - 3.0);
            state.apply(&mut x, &[g]).unwrap();
        }
        assert!((x[0] - 3.0).abs() < 1e-3, "got {}", x[0]);
    }

    #[test]
    fn lr_decays_exponentially() {
        let cfg = AdamConfig::default();
        let mut state = AdamState::new(1, cfg);
        assert!((state.effective_lr() - cfg.base_lr).abs() < 1e-18);
        let mut p = vec![0.0];
        for _ in 0..1000 {
            state.apply(&mut p, &[0.1]).unwrap();
        }
        //  after decay_steps steps the rate is base_lr·decay_rate
        let expected = cfg.base_lr * cfg.decay_rate;
        assert!((state.effective_lr() - expected).abs() < 1e-12);
    }

    #[test]
    fn huge_decay_steps_reduce_to_constant_lr() {
        let cfg = AdamConfig {
            decay_steps: u64::MAX,
            ..AdamConfig::default()
        };
        let mut state = AdamState::new(1, cfg);
        let mut p = vec![0.0];
        for _ in 0..100 {
            state.apply(&mut p, &[1.0]).unwrap();
        }
        assert!((state.effective_lr() - cfg.base_lr).abs() < 1e-15);
    }

    #[test]
    fn nan_gradient_rejected() {
        let mut state = AdamState::new(1, AdamConfig::default());
        let mut p = vec![0.0];
        assert!(matches!(
            state.apply(&mut p, &[f64::NAN]),
            Err(Error::NanGradient { .. })
        ));
    }

    #[test]
    fn network_level_step_with_zero_gradient_is_identity() {
        use crate::nn::NetworkArch;
        use crate::rng::{stream, substream};
        let arch = NetworkArch::new(2, vec![3], 1);
        let mut rng = substream(1, &[stream::INIT]);
        let mut params = MlpParams::init(&arch, &mut rng);
        let before = params.to_flat();
        let grads = MlpParams::zeros(&arch);
        let mut state = AdamState::new(params.num_params(), AdamConfig::default());
        adam_step(&mut state, &mut params, &grads).unwrap();
        assert_eq!(params.to_flat(), before);
        assert_eq!(state.step_count(), 1);
    }
}
