//! Minimal fully connected networks with reverse-mode gradients.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Hidden-layer nonlinearity. Output layers are always linear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

/// Layer sizes of a fully connected network with a linear output layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkArch {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub output_dim: usize,
    pub hidden_activation: Activation,
}

impl NetworkArch {
    pub fn new(input_dim: usize, hidden_layers: Vec<usize>, output_dim: usize) -> Self {
        NetworkArch {
            input_dim,
            hidden_layers,
            output_dim,
            hidden_activation: Activation::Relu,
        }
    }

    pub fn with_activation(mut self, act: Activation) -> Self {
        self.hidden_activation = act;
        self
    }

    /// Per-layer (fan_in, fan_out) pairs, hidden layers first.
    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers.len() + 1);
        let mut fan_in = self.input_dim;
        for &h in &self.hidden_layers {
            dims.push((fan_in, h));
            fan_in = h;
        }
        dims.push((fan_in, self.output_dim));
        dims
    }
}

struct Layer {
    weight: Matrix, // out × in
    bias: Vec<f64>,
}

/// Weights and biases of one network, with a flat parameter view for the
/// optimizer and the checkpoint writer (layer order, weight then bias,
/// weight entries in column-major order).
pub struct MlpParams {
    arch: NetworkArch,
    layers: Vec<Layer>,
}

/// Activations recorded during a forward pass, consumed by `backward`.
pub struct Tape {
    layer_inputs: Vec<Vector>,    // input to each layer
    pre_activations: Vec<Vector>, // z = Wx + b per layer
}

impl MlpParams {
    /// All-zero parameters (useful as a gradient accumulator).
    pub fn zeros(arch: &NetworkArch) -> Self {
        let layers = arch
            .layer_dims()
            .iter()
            .map(|&(fan_in, fan_out)| Layer {
                weight: Matrix::zeros(fan_out, fan_in),
                bias: vec![0.0; fan_out],
            })
            .collect();
        MlpParams {
            arch: arch.clone(),
            layers,
        }
    }

    /// Seeded initialization: He-uniform for relu hidden layers,
    /// Glorot-uniform for tanh hidden layers and the linear output layer.
    pub fn init(arch: &NetworkArch, rng: &mut ChaCha8Rng) -> Self {
        let dims = arch.layer_dims();
        let n_layers = dims.len();
        let layers = dims
            .iter()
            .enumerate()
            .map(|(l, &(fan_in, fan_out))| {
                let is_hidden = l + 1 < n_layers;
                let limit = if is_hidden && arch.hidden_activation == Activation::Relu {
                    (6.0 / fan_in as f64).sqrt()
                } else {
                    (6.0 / (fan_in + fan_out) as f64).sqrt()
                };
                let weight =
                    Matrix::from_fn(fan_out, fan_in, |_, _| rng.random_range(-limit..limit));
                Layer {
                    weight,
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        MlpParams {
            arch: arch.clone(),
            layers,
        }
    }

    pub fn arch(&self) -> &NetworkArch {
        &self.arch
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.rows() * l.weight.cols() + l.bias.len())
            .sum()
    }

    /// Appends all parameters to `out` in the fixed flat order.
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            out.extend_from_slice(layer.weight.as_slice());
            out.extend_from_slice(&layer.bias);
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.flatten_into(&mut out);
        out
    }

    /// Reads parameters back from a flat slice; returns the number consumed.
    pub fn assign_from_flat(&mut self, flat: &[f64]) -> Result<usize> {
        let needed = self.num_params();
        if flat.len() < needed {
            return Err(Error::DimMismatch {
                context: "flat parameter view",
                expected: needed,
                got: flat.len(),
            });
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            let w_len = layer.weight.rows() * layer.weight.cols();
            layer
                .weight
                .as_mut_slice()
                .copy_from_slice(&flat[offset..offset + w_len]);
            offset += w_len;
            let b_len = layer.bias.len();
            layer.bias.copy_from_slice(&flat[offset..offset + b_len]);
            offset += b_len;
        }
        Ok(offset)
    }

    /// Per-layer tensor shapes in flat order, as (name, rows, cols) with
    /// cols = 0 marking a bias vector. Drives the checkpoint manifest.
    pub fn tensor_shapes(&self, prefix: &str) -> Vec<(String, usize, usize)> {
        let mut shapes = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            shapes.push((
                format!("{prefix}.w{l}"),
                layer.weight.rows(),
                layer.weight.cols(),
            ));
            shapes.push((format!("{prefix}.b{l}"), layer.bias.len(), 0));
        }
        shapes
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|x| x.is_finite()))
    }

    /// In-place `self += s · other` over all parameters (gradient
    /// accumulation in a fixed order).
    pub fn add_scaled(&mut self, other: &MlpParams, s: f64) -> Result<()> {
        if self.arch != other.arch {
            return Err(Error::StaleTape);
        }
        for (a, b) in self.layers.iter_mut().zip(other.layers.iter()) {
            a.weight.axpy(s, &b.weight)?;
            for (x, &y) in a.bias.iter_mut().zip(b.bias.iter()) {
                *x += s * y;
            }
        }
        Ok(())
    }

    /// Forward pass. The tape holds everything `backward` needs.
    pub fn forward(&self, input: &Vector) -> Result<(Vector, Tape)> {
        if input.len() != self.arch.input_dim {
            return Err(Error::DimMismatch {
                context: "network input",
                expected: self.arch.input_dim,
                got: input.len(),
            });
        }
        let n_layers = self.layers.len();
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut pre_activations = Vec::with_capacity(n_layers);
        let mut x = input.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.weight.matvec(&x)?;
            for (zi, bi) in z.iter_mut().zip(layer.bias.iter()) {
                *zi += bi;
            }
            layer_inputs.push(x);
            let is_output = l + 1 == n_layers;
            x = if is_output {
                z.clone()
            } else {
                Vector::from_vec(
                    z.iter()
                        .map(|&v| self.arch.hidden_activation.apply(v))
                        .collect(),
                )
            };
            pre_activations.push(z);
        }
        Ok((
            x,
            Tape {
                layer_inputs,
                pre_activations,
            },
        ))
    }

    /// Reverse pass from `output_grad`. Returns (parameter gradients,
    /// gradient w.r.t. the network input).
    pub fn backward(&self, tape: &Tape, output_grad: &Vector) -> Result<(MlpParams, Vector)> {
        let n_layers = self.layers.len();
        if tape.layer_inputs.len() != n_layers
            || tape.pre_activations.len() != n_layers
            || tape.layer_inputs[0].len() != self.arch.input_dim
        {
            return Err(Error::StaleTape);
        }
        if output_grad.len() != self.arch.output_dim {
            return Err(Error::DimMismatch {
                context: "output gradient",
                expected: self.arch.output_dim,
                got: output_grad.len(),
            });
        }
        for (layer, input) in self.layers.iter().zip(tape.layer_inputs.iter()) {
            if layer.weight.cols() != input.len() {
                return Err(Error::StaleTape);
            }
        }

        let mut grads = MlpParams::zeros(&self.arch);
        let mut delta = output_grad.clone();
        let mut input_grad = Vector::zeros(0);
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            let a = &tape.layer_inputs[l];
            // dW = δ ⊗ aᵀ, db = δ
            let g = &mut grads.layers[l];
            for j in 0..a.len() {
                let aj = a[j];
                for i in 0..delta.len() {
                    g.weight.set(i, j, delta[i] * aj);
                }
            }
            g.bias.copy_from_slice(&delta);
            input_grad = layer.weight.matvec_t(&delta)?;
            if l > 0 {
                let pre = &tape.pre_activations[l - 1];
                delta = Vector::from_vec(
                    input_grad
                        .iter()
                        .zip(pre.iter())
                        .map(|(&d, &z)| d * self.arch.hidden_activation.derivative(z))
                        .collect(),
                );
            }
        }
        Ok((grads, input_grad))
    }
}

/// Compares analytic gradients against central finite differences
/// (h = 1e-5) over every parameter; returns the worst relative
/// discrepancy, with an absolute floor of 1e-3 in the denominator so
/// near-zero gradients are compared absolutely.
pub fn finite_difference_check(
    params: &MlpParams,
    input: &Vector,
    loss: &dyn Fn(&Vector) -> (f64, Vector),
) -> Result<f64> {
    let (out, tape) = params.forward(input)?;
    let (_, out_grad) = loss(&out);
    let (grads, _) = params.backward(&tape, &out_grad)?;
    let analytic = grads.to_flat();

    let h = 1e-5;
    let mut flat = params.to_flat();
    let mut probe = MlpParams::zeros(&params.arch);
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let orig = flat[i];
        flat[i] = orig + h;
        probe.assign_from_flat(&flat)?;
        let (plus, _) = probe.forward(input)?;
        let (lp, _) = loss(&plus);
        flat[i] = orig - h;
        probe.assign_from_flat(&flat)?;
        let (minus, _) = probe.forward(input)?;
        let (lm, _) = loss(&minus);
        flat[i] = orig;
        let numeric = (lp - lm) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-3);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, substream};

    fn quadratic_loss(target: &[f64]) -> impl Fn(&Vector) -> (f64, Vector) + '_ {
        move |out: &Vector| {
            let diff: Vec<f64> = out.iter().zip(target.iter()).map(|(a, b)| a - b).collect();
            let loss = 0.5 * diff.iter().map(|d| d * d).sum::<f64>();
            (loss, Vector::from_vec(diff))
        }
    }

    #[test]
    fn zero_net_outputs_zero() {
        let arch = NetworkArch::new(3, vec![4], 2);
        let params = MlpParams::zeros(&arch);
        let (out, _) = params
            .forward(&Vector::from_vec(vec![1.0, -2.0, 3.0]))
            .unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identity_linear_layer_passes_through() {
        // Single linear layer W = I, b = 0 (no hidden layers).
        let arch = NetworkArch::new(3, vec![], 3);
        let mut params = MlpParams::zeros(&arch);
        let mut flat = params.to_flat();
        // weight is 3x3 column-major at the front of the flat view
        flat[0] = 1.0;
        flat[4] = 1.0;
        flat[8] = 1.0;
        params.assign_from_flat(&flat).unwrap();
        let x = Vector::from_vec(vec![0.5, -1.5, 2.0]);
        let (out, _) = params.forward(&x).unwrap();
        assert_eq!(out.as_ref() as &[f64], x.as_ref() as &[f64]);
    }

    #[test]
    fn forward_matches_duplicate_loop() {
        // Independent straightforward re-evaluation of the same weights.
        let arch = NetworkArch::new(4, vec![5, 3], 2).with_activation(Activation::Tanh);
        let mut rng = substream(11, &[stream::INIT]);
        let params = MlpParams::init(&arch, &mut rng);
        let input = Vector::from_vec(vec![0.3, -0.8, 1.2, 0.1]);

        let flat = params.to_flat();
        let mut offset = 0;
        let mut x = input.to_vec();
        let dims = [(4usize, 5usize), (5, 3), (3, 2)];
        for (l, &(fan_in, fan_out)) in dims.iter().enumerate() {
            let w = &flat[offset..offset + fan_in * fan_out];
            offset += fan_in * fan_out;
            let b = &flat[offset..offset + fan_out];
            offset += fan_out;
            let mut z = vec![0.0; fan_out];
            for i in 0..fan_out {
                let mut s = b[i];
                for j in 0..fan_in {
                    // column-major: w[i + j*fan_out]
                    s += w[i + j * fan_out] * x[j];
                }
                z[i] = s;
            }
            x = if l == 2 {
                z
            } else {
                z.iter().map(|v| v.tanh()).collect()
            };
        }

        let (out, _) = params.forward(&input).unwrap();
        for (a, b) in out.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn backward_linear_single_neuron() {
        // y = w·x + b with x = 2: dy/dw = 2, dy/db = 1.
        let arch = NetworkArch::new(1, vec![], 1);
        let mut params = MlpParams::zeros(&arch);
        params.assign_from_flat(&[3.0, 0.5]).unwrap();
        let (out, tape) = params.forward(&Vector::from_vec(vec![2.0])).unwrap();
        assert!((out[0] - 6.5).abs() < 1e-15);
        let (grads, input_grad) = params
            .backward(&tape, &Vector::from_vec(vec![1.0]))
            .unwrap();
        let flat = grads.to_flat();
        assert_eq!(flat, vec![2.0, 1.0]);
        assert_eq!(input_grad[0], 3.0);
    }

    #[test]
    fn relu_blocks_gradient_at_negative_preactivation() {
        let arch = NetworkArch::new(1, vec![1], 1);
        let mut params = MlpParams::zeros(&arch);
        // hidden: w=1, b=-2 → pre = x-2 < 0 for x=1; output: w=1, b=0
        params.assign_from_flat(&[1.0, -2.0, 1.0, 0.0]).unwrap();
        let (_, tape) = params.forward(&Vector::from_vec(vec![1.0])).unwrap();
        let (grads, _) = params
            .backward(&tape, &Vector::from_vec(vec![1.0]))
            .unwrap();
        let flat = grads.to_flat();
        // gradient through the dead relu unit is zero for the first layer
        assert_eq!(flat[0], 0.0);
        assert_eq!(flat[1], 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..20u64 {
            let arch = NetworkArch::new(3, vec![6, 5], 2).with_activation(Activation::Relu);
            let mut rng = substream(seed, &[stream::INIT]);
            let mut params = MlpParams::init(&arch, &mut rng);
            // Nonzero biases keep pre-activations away from the relu kink.
            let n = params.num_params();
            let mut flat = params.to_flat();
            for (i, v) in flat.iter_mut().enumerate() {
                if *v == 0.0 {
                    *v = 0.05 + 0.01 * (i % 7) as f64;
                }
            }
            params.assign_from_flat(&flat[..n]).unwrap();
            let input = Vector::from_vec(vec![0.4, -0.7, 0.9]);
            let target = [0.3, -0.2];
            let err = finite_difference_check(&params, &input, &quadratic_loss(&target)).unwrap();
            assert!(err < 1e-4, "seed {seed}: fd error {err}");
        }
    }

    #[test]
    fn linear_net_fd_error_is_tiny() {
        let arch = NetworkArch::new(3, vec![], 2);
        let mut rng = substream(41, &[stream::INIT]);
        let params = MlpParams::init(&arch, &mut rng);
        let input = Vector::from_vec(vec![0.7, -0.2, 1.1]);
        let target = [0.5, -0.5];
        let err = finite_difference_check(&params, &input, &quadratic_loss(&target)).unwrap();
        assert!(err < 1e-7, "fd error {err}");
    }

    #[test]
    fn tanh_fd_error_is_small() {
        let arch = NetworkArch::new(2, vec![4, 4], 3).with_activation(Activation::Tanh);
        let mut rng = substream(99, &[stream::INIT]);
        let params = MlpParams::init(&arch, &mut rng);
        let input = Vector::from_vec(vec![0.25, -0.5]);
        let target = [0.1, 0.2, -0.3];
        let err = finite_difference_check(&params, &input, &quadratic_loss(&target)).unwrap();
        assert!(err < 1e-6, "fd error {err}");
    }

    #[test]
    fn forward_is_deterministic() {
        let arch = NetworkArch::new(5, vec![8, 8], 4);
        let mut rng = substream(3, &[stream::INIT]);
        let params = MlpParams::init(&arch, &mut rng);
        let x = Vector::from_vec(vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        let (a, _) = params.forward(&x).unwrap();
        let (b, _) = params.forward(&x).unwrap();
        assert_eq!(a.as_ref() as &[f64], b.as_ref() as &[f64]);
    }

    #[test]
    fn stale_tape_rejected() {
        let arch_a = NetworkArch::new(2, vec![3], 1);
        let arch_b = NetworkArch::new(3, vec![3], 1);
        let mut rng = substream(5, &[stream::INIT]);
        let pa = MlpParams::init(&arch_a, &mut rng);
        let pb = MlpParams::init(&arch_b, &mut rng);
        let (_, tape) = pb.forward(&Vector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
        assert!(matches!(
            pa.backward(&tape, &Vector::from_vec(vec![1.0])),
            Err(Error::StaleTape)
        ));
    }
}
