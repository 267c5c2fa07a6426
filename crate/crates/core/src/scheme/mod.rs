//! The learned coded-computation scheme: a degree-G matrix polynomial
//! encoder whose coefficients come from networks, a degree-P vector-valued
//! computation polynomial applied by each worker, and an interpolation
//! decoder with recovery threshold R = G·P + 1.
//!
//! Workers see only the encoded matrix and the computation coefficients;
//! the composite worker output is a polynomial of degree ≤ G·P in the
//! evaluation scalar, so any R distinct evaluations determine it.

mod train;

pub use train::{
    accumulate_gradients, fd_check_scheme, forward_train, train_scheme, InstanceTrace, NanAbort,
    TrainOptions, TrainOutcome,
};

use crate::error::{Error, Result};
use crate::interp::InterpolatedPoly;
use crate::linalg::{mat_powers, Matrix, Vector};
use crate::nn::{Activation, MlpParams, NetworkArch};
use crate::rng::{stream, substream};

/// Hyperparameters of one scheme instance.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    /// Input matrices are m × m.
    pub m: usize,
    /// Number of inputs per set.
    pub k: usize,
    /// Encoder polynomial degree.
    pub g: usize,
    /// Computation polynomial degree.
    pub p: usize,
    /// Output dimension of the target function.
    pub v: usize,
    /// Anchor scalars the decoder evaluates at; fixed for the lifetime of
    /// a trained model. Defaults to k/K.
    pub betas: Vec<f64>,
    pub hidden_layers: Vec<usize>,
    pub hidden_activation: Activation,
}

impl SchemeConfig {
    pub fn new(m: usize, k: usize, g: usize, p: usize, v: usize) -> Self {
        SchemeConfig {
            m,
            k,
            g,
            p,
            v,
            betas: default_betas(k),
            hidden_layers: vec![100, 100],
            hidden_activation: Activation::Relu,
        }
    }

    pub fn with_hidden(mut self, hidden: Vec<usize>) -> Self {
        self.hidden_layers = hidden;
        self
    }

    pub fn with_activation(mut self, act: Activation) -> Self {
        self.hidden_activation = act;
        self
    }

    pub fn with_betas(mut self, betas: Vec<f64>) -> Self {
        self.betas = betas;
        self
    }

    /// R = G·P + 1.
    pub fn recovery_threshold(&self) -> usize {
        self.g * self.p + 1
    }

    pub fn encoder_arch(&self) -> NetworkArch {
        NetworkArch::new(
            self.k * self.m * self.m,
            self.hidden_layers.clone(),
            self.m * self.m,
        )
        .with_activation(self.hidden_activation)
    }

    pub fn lambda0_arch(&self) -> NetworkArch {
        NetworkArch::new(
            self.k * self.m * self.m,
            self.hidden_layers.clone(),
            self.v * self.m * self.m,
        )
        .with_activation(self.hidden_activation)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 || self.v == 0 {
            return Err(Error::Config("m, k, v must be positive".into()));
        }
        if self.betas.len() != self.k {
            return Err(Error::Config(format!(
                "need {} anchor scalars, got {}",
                self.k,
                self.betas.len()
            )));
        }
        for i in 0..self.betas.len() {
            for j in (i + 1)..self.betas.len() {
                if self.betas[i] == self.betas[j] {
                    return Err(Error::Config(format!(
                        "anchor scalars must be distinct (beta[{i}] == beta[{j}])"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// β_k = k/K for k = 1..K.
pub fn default_betas(k: usize) -> Vec<f64> {
    (1..=k).map(|i| i as f64 / k as f64).collect()
}

/// α_n = n/(N+1) for n = 1..N.
pub fn default_alphas(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// Encoder polynomial coefficients U_0..U_G (m × m each).
#[derive(Clone, Debug)]
pub struct EncoderCoefficients {
    pub us: Vec<Matrix>,
}

/// Computation polynomial coefficients V_0..V_P (v × m² each).
///
/// `from_network[p]` records whether coefficient p was produced by a
/// network from the inputs (true for V_0) or is a standalone learnable
/// matrix independent of the inputs.
#[derive(Clone, Debug)]
pub struct ComputationCoefficients {
    pub vs: Vec<Matrix>,
    pub from_network: Vec<bool>,
}

/// One worker's contribution: the evaluation node and the result vector.
#[derive(Clone, Debug)]
pub struct WorkerResult {
    pub alpha: f64,
    pub y: Vector,
}

/// All trainable state: G+1 encoder networks, the Λ₀ network producing
/// V_0, and the P standalone computation matrices V_1..V_P.
pub struct SchemeParams {
    pub encoders: Vec<MlpParams>,
    pub lambda0: MlpParams,
    pub v_rest: Vec<Matrix>,
}

impl SchemeParams {
    /// Seeded initialization; each parameter group draws from its own
    /// RNG substream so adding groups never shifts the others.
    pub fn init(cfg: &SchemeConfig, seed: u64) -> Self {
        let enc_arch = cfg.encoder_arch();
        let encoders = (0..=cfg.g)
            .map(|g| {
                let mut rng = substream(seed, &[stream::INIT, 0, g as u64]);
                MlpParams::init(&enc_arch, &mut rng)
            })
            .collect();
        let mut rng = substream(seed, &[stream::INIT, 1, 0]);
        let lambda0 = MlpParams::init(&cfg.lambda0_arch(), &mut rng);
        let m2 = cfg.m * cfg.m;
        let limit = (6.0 / (cfg.v + m2) as f64).sqrt();
        let v_rest = (1..=cfg.p)
            .map(|p| {
                let mut rng = substream(seed, &[stream::INIT, 2, p as u64]);
                Matrix::from_fn(cfg.v, m2, |_, _| {
                    use rand::Rng;
                    rng.random_range(-limit..limit)
                })
            })
            .collect();
        SchemeParams {
            encoders,
            lambda0,
            v_rest,
        }
    }

    /// Zero parameters with the same shapes (gradient accumulator).
    pub fn zeros(cfg: &SchemeConfig) -> Self {
        let enc_arch = cfg.encoder_arch();
        let m2 = cfg.m * cfg.m;
        SchemeParams {
            encoders: (0..=cfg.g).map(|_| MlpParams::zeros(&enc_arch)).collect(),
            lambda0: MlpParams::zeros(&cfg.lambda0_arch()),
            v_rest: (1..=cfg.p).map(|_| Matrix::zeros(cfg.v, m2)).collect(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.encoders.iter().map(|e| e.num_params()).sum::<usize>()
            + self.lambda0.num_params()
            + self
                .v_rest
                .iter()
                .map(|m| m.rows() * m.cols())
                .sum::<usize>()
    }

    /// Flat parameter order: encoders 0..G, then Λ₀, then V_1..V_P.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for enc in &self.encoders {
            enc.flatten_into(&mut out);
        }
        self.lambda0.flatten_into(&mut out);
        for m in &self.v_rest {
            out.extend_from_slice(m.as_slice());
        }
        out
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::DimMismatch {
                context: "scheme flat parameter view",
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let mut offset = 0;
        for enc in &mut self.encoders {
            offset += enc.assign_from_flat(&flat[offset..])?;
        }
        offset += self.lambda0.assign_from_flat(&flat[offset..])?;
        for m in &mut self.v_rest {
            let len = m.rows() * m.cols();
            m.as_mut_slice()
                .copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }
}

/// Flattens the K input matrices column-major in index order into the
/// shared network input of length K·m².
pub fn flatten_inputs(inputs: &[Matrix], cfg: &SchemeConfig) -> Result<Vector> {
    if inputs.len() != cfg.k {
        return Err(Error::DimMismatch {
            context: "input set size",
            expected: cfg.k,
            got: inputs.len(),
        });
    }
    let mut z = Vec::with_capacity(cfg.k * cfg.m * cfg.m);
    for x in inputs {
        if x.rows() != cfg.m || x.cols() != cfg.m {
            return Err(Error::DimMismatch {
                context: "input matrix dimension",
                expected: cfg.m,
                got: x.rows(),
            });
        }
        z.extend_from_slice(x.as_slice());
    }
    Ok(Vector::from_vec(z))
}

/// U_g = reshape(Γ_g(X), m × m) for g = 0..G.
pub fn derive_encoder_coeffs(
    encoders: &[MlpParams],
    inputs: &[Matrix],
    cfg: &SchemeConfig,
) -> Result<EncoderCoefficients> {
    let z = flatten_inputs(inputs, cfg)?;
    let mut us = Vec::with_capacity(encoders.len());
    for net in encoders {
        let (out, _) = net.forward(&z)?;
        us.push(Matrix::from_col_major(cfg.m, cfg.m, out.into_vec())?);
    }
    Ok(EncoderCoefficients { us })
}

/// Σ U_g αᵍ by Horner's rule in matrix form.
pub fn encode(coeffs: &EncoderCoefficients, alpha: f64) -> Matrix {
    let mut iter = coeffs.us.iter().rev();
    let mut acc = iter
        .next()
        .expect("encoder coefficients are never empty")
        .clone();
    for u in iter {
        acc = acc.scale(alpha);
        acc.axpy(1.0, u).expect("uniform coefficient dims");
    }
    acc
}

/// V_0 = reshape(Λ₀(X), v × m²); V_1..V_P are the standalone matrices,
/// independent of the inputs.
pub fn derive_computation_coeffs(
    lambda0: &MlpParams,
    v_rest: &[Matrix],
    inputs: &[Matrix],
    cfg: &SchemeConfig,
) -> Result<ComputationCoefficients> {
    let z = flatten_inputs(inputs, cfg)?;
    let (out, _) = lambda0.forward(&z)?;
    let v0 = Matrix::from_col_major(cfg.v, cfg.m * cfg.m, out.into_vec())?;
    let mut vs = Vec::with_capacity(1 + v_rest.len());
    let mut from_network = Vec::with_capacity(1 + v_rest.len());
    vs.push(v0);
    from_network.push(true);
    for m in v_rest {
        vs.push(m.clone());
        from_network.push(false);
    }
    Ok(ComputationCoefficients { vs, from_network })
}

/// ỹ = Σ_p V_p · vec(x̃ᵖ).
pub fn worker_compute(coeffs: &ComputationCoefficients, x_tilde: &Matrix) -> Result<Vector> {
    let p_max = coeffs.vs.len() - 1;
    let powers = mat_powers(x_tilde, p_max)?;
    let v_dim = coeffs.vs[0].rows();
    let mut y = Vector::zeros(v_dim);
    for (vp, w) in coeffs.vs.iter().zip(powers.iter()) {
        let term = vp.matvec(w.as_slice())?;
        for (yi, ti) in y.iter_mut().zip(term.iter()) {
            *yi += ti;
        }
    }
    Ok(y)
}

/// Fits the degree-(R−1) polynomial through the first `threshold` worker
/// results. Extra results beyond the threshold are ignored.
pub fn interpolate_results(results: &[WorkerResult], threshold: usize) -> Result<InterpolatedPoly> {
    if results.len() < threshold {
        return Err(Error::insufficient(threshold, results.len()));
    }
    let used = &results[..threshold];
    let nodes: Vec<f64> = used.iter().map(|r| r.alpha).collect();
    let values: Vec<Vector> = used.iter().map(|r| r.y.clone()).collect();
    InterpolatedPoly::fit(&nodes, values)
}

/// Interpolates the composite polynomial from R = G·P+1 results and
/// evaluates it at the anchor scalars, yielding f̂_1..f̂_K.
pub fn decode(results: &[WorkerResult], cfg: &SchemeConfig) -> Result<Vec<Vector>> {
    let poly = interpolate_results(results, cfg.recovery_threshold())?;
    Ok(cfg.betas.iter().map(|&b| poly.eval(b)).collect())
}

/// Cost function selector: the plain Euclidean distance, or the distance
/// plus a weight-5 unit-norm penalty used for the eigenvector problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostKind {
    Norm,
    UnitNormPenalty,
}

impl CostKind {
    pub fn eval(&self, f_hat: &Vector, f: &Vector) -> Result<f64> {
        Ok(self.eval_with_grad(f_hat, f)?.0)
    }

    /// Cost and its gradient w.r.t. f̂. The norm terms use the zero
    /// subgradient at their (measure-zero) kinks.
    pub fn eval_with_grad(&self, f_hat: &Vector, f: &Vector) -> Result<(f64, Vector)> {
        let diff = f_hat.sub(f)?;
        let dist = diff.norm();
        let mut grad = if dist > 0.0 {
            Vector::from_vec(diff.iter().map(|d| d / dist).collect())
        } else {
            Vector::zeros(f_hat.len())
        };
        let mut cost = dist;
        if *self == CostKind::UnitNormPenalty {
            let n = f_hat.norm();
            cost += 5.0 * (n - 1.0) * (n - 1.0);
            if n > 0.0 {
                let s = 10.0 * (n - 1.0) / n;
                for (g, x) in grad.iter_mut().zip(f_hat.iter()) {
                    *g += s * x;
                }
            }
        }
        Ok((cost, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, substream};
    use rand::Rng;

    fn small_cfg() -> SchemeConfig {
        SchemeConfig::new(3, 2, 1, 2, 3).with_hidden(vec![8, 7])
    }

    fn random_inputs(cfg: &SchemeConfig, seed: u64) -> Vec<Matrix> {
        let mut rng = substream(seed, &[stream::TRAIN, 42]);
        (0..cfg.k)
            .map(|_| Matrix::from_fn(cfg.m, cfg.m, |_, _| rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn recovery_threshold_formula() {
        assert_eq!(SchemeConfig::new(5, 3, 2, 2, 5).recovery_threshold(), 5);
        assert_eq!(SchemeConfig::new(5, 3, 1, 1, 5).recovery_threshold(), 2);
        assert_eq!(SchemeConfig::new(5, 3, 0, 7, 5).recovery_threshold(), 1);
    }

    #[test]
    fn default_anchor_and_node_grids() {
        assert_eq!(default_betas(3), vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let alphas = default_alphas(5);
        assert_eq!(alphas.len(), 5);
        assert!((alphas[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((alphas[4] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn zero_encoder_nets_give_zero_coefficients() {
        let cfg = small_cfg();
        let nets: Vec<MlpParams> = (0..=cfg.g)
            .map(|_| MlpParams::zeros(&cfg.encoder_arch()))
            .collect();
        let coeffs = derive_encoder_coeffs(&nets, &random_inputs(&cfg, 1), &cfg).unwrap();
        assert_eq!(coeffs.us.len(), cfg.g + 1);
        for u in &coeffs.us {
            assert_eq!(u.frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn identity_passthrough_encoder_returns_input() {
        // K=1 and a single linear layer wired to the identity: U_0 = X_1.
        let cfg = SchemeConfig::new(2, 1, 0, 1, 4).with_hidden(vec![]);
        let arch = cfg.encoder_arch();
        let mut net = MlpParams::zeros(&arch);
        let mut flat = net.to_flat();
        for i in 0..4 {
            flat[i + i * 4] = 1.0; // 4x4 identity, column-major
        }
        net.assign_from_flat(&flat).unwrap();
        let x = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let coeffs = derive_encoder_coeffs(&[net], std::slice::from_ref(&x), &cfg).unwrap();
        assert_eq!(coeffs.us[0], x);
    }

    #[test]
    fn encoder_coeffs_have_expected_shape_and_are_finite() {
        let cfg = small_cfg();
        let params = SchemeParams::init(&cfg, 7);
        let coeffs =
            derive_encoder_coeffs(&params.encoders, &random_inputs(&cfg, 2), &cfg).unwrap();
        assert_eq!(coeffs.us.len(), cfg.g + 1);
        for u in &coeffs.us {
            assert_eq!((u.rows(), u.cols()), (cfg.m, cfg.m));
            assert!(u.is_finite());
        }
    }

    #[test]
    fn encode_at_zero_returns_constant_coefficient() {
        let u0 = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let u1 = Matrix::from_rows(&[&[5.0, 6.0], &[7.0, 8.0]]);
        let coeffs = EncoderCoefficients {
            us: vec![u0.clone(), u1],
        };
        assert_eq!(encode(&coeffs, 0.0), u0);
    }

    #[test]
    fn encode_linear_example() {
        // U_0 = I, U_1 = 2I, α = 0.5 → 2I
        let coeffs = EncoderCoefficients {
            us: vec![Matrix::identity(2), Matrix::identity(2).scale(2.0)],
        };
        let out = encode(&coeffs, 0.5);
        assert!(out.max_abs_diff(&Matrix::identity(2).scale(2.0)) < 1e-15);
    }

    #[test]
    fn encode_matches_naive_power_sum() {
        let mut rng = substream(13, &[stream::TRAIN]);
        let us: Vec<Matrix> = (0..4)
            .map(|_| Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let coeffs = EncoderCoefficients { us: us.clone() };
        let alpha: f64 = 0.3;
        let mut expected = Matrix::zeros(3, 3);
        for (g, u) in us.iter().enumerate() {
            expected.axpy(alpha.powi(g as i32), u).unwrap();
        }
        assert!(encode(&coeffs, alpha).max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn computation_coeffs_v0_from_network_rest_standalone() {
        let cfg = small_cfg();
        let params = SchemeParams::init(&cfg, 3);
        let in_a = random_inputs(&cfg, 10);
        let in_b = random_inputs(&cfg, 11);
        let ca = derive_computation_coeffs(&params.lambda0, &params.v_rest, &in_a, &cfg).unwrap();
        let cb = derive_computation_coeffs(&params.lambda0, &params.v_rest, &in_b, &cfg).unwrap();
        assert_eq!(ca.vs.len(), cfg.p + 1);
        assert_eq!(ca.from_network, vec![true, false, false]);
        // V_0 varies with the inputs; V_1..V_P do not.
        assert!(ca.vs[0].max_abs_diff(&cb.vs[0]) > 0.0);
        for p in 1..=cfg.p {
            assert_eq!(ca.vs[p], cb.vs[p]);
            assert_eq!(ca.vs[p], params.v_rest[p - 1]);
        }
    }

    #[test]
    fn zero_lambda0_gives_zero_v0() {
        let cfg = small_cfg();
        let lambda0 = MlpParams::zeros(&cfg.lambda0_arch());
        let v_rest: Vec<Matrix> = (0..cfg.p)
            .map(|_| Matrix::zeros(cfg.v, cfg.m * cfg.m))
            .collect();
        let coeffs =
            derive_computation_coeffs(&lambda0, &v_rest, &random_inputs(&cfg, 4), &cfg).unwrap();
        assert_eq!(coeffs.vs[0].frobenius_norm(), 0.0);
    }

    #[test]
    fn worker_compute_zero_coeffs() {
        let coeffs = ComputationCoefficients {
            vs: vec![Matrix::zeros(3, 4), Matrix::zeros(3, 4)],
            from_network: vec![true, false],
        };
        let y = worker_compute(&coeffs, &Matrix::identity(2)).unwrap();
        assert!(y.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn worker_compute_identity_v1_vectorizes_input() {
        // P=1, V_0 = 0, V_1 = I(m²) with v = m²: ỹ = vec(x̃)
        let m = 2;
        let coeffs = ComputationCoefficients {
            vs: vec![Matrix::zeros(4, 4), Matrix::identity(m * m)],
            from_network: vec![true, false],
        };
        let x = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let y = worker_compute(&coeffs, &x).unwrap();
        assert_eq!(y.as_ref() as &[f64], x.vec().as_ref() as &[f64]);
    }

    #[test]
    fn worker_compute_matches_naive_sum() {
        let mut rng = substream(77, &[stream::TRAIN]);
        let m = 3;
        let v_dim = 2;
        let vs: Vec<Matrix> = (0..3)
            .map(|_| Matrix::from_fn(v_dim, m * m, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let x = Matrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        let coeffs = ComputationCoefficients {
            vs: vs.clone(),
            from_network: vec![true, false, false],
        };
        let y = worker_compute(&coeffs, &x).unwrap();

        // independent term-by-term loop
        let mut expected = vec![0.0; v_dim];
        for (p, vp) in vs.iter().enumerate() {
            let xp = crate::linalg::mat_pow(&x, p).unwrap();
            let vecx = xp.vec();
            for (i, e) in expected.iter_mut().enumerate() {
                for (j, xj) in vecx.iter().enumerate() {
                    *e += vp.get(i, j) * xj;
                }
            }
        }
        for (a, b) in y.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn decode_quadratic_exactly() {
        // v(α) = α² sampled at 3 nodes (GP = 2): exact at any β.
        let cfg = SchemeConfig::new(1, 2, 2, 1, 1).with_betas(vec![0.4, 0.9]);
        let results: Vec<WorkerResult> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&a| WorkerResult {
                alpha: a,
                y: Vector::from_vec(vec![a * a]),
            })
            .collect();
        let out = decode(&results, &cfg).unwrap();
        assert!((out[0][0] - 0.16).abs() < 1e-13);
        assert!((out[1][0] - 0.81).abs() < 1e-13);
    }

    #[test]
    fn decode_constant_results() {
        let cfg = SchemeConfig::new(1, 3, 1, 1, 2);
        let results: Vec<WorkerResult> = [0.25, 0.75]
            .iter()
            .map(|&a| WorkerResult {
                alpha: a,
                y: Vector::from_vec(vec![4.0, -1.5]),
            })
            .collect();
        for f_hat in decode(&results, &cfg).unwrap() {
            assert!((f_hat[0] - 4.0).abs() < 1e-12);
            assert!((f_hat[1] + 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn decode_insufficient_results_reports_missing() {
        let cfg = SchemeConfig::new(1, 2, 2, 2, 1); // R = 5
        let results: Vec<WorkerResult> = (0..3)
            .map(|i| WorkerResult {
                alpha: i as f64 * 0.1 + 0.1,
                y: Vector::zeros(1),
            })
            .collect();
        match decode(&results, &cfg) {
            Err(Error::InsufficientResults {
                needed,
                got,
                missing,
            }) => {
                assert_eq!((needed, got, missing), (5, 3, 2));
            }
            other => panic!("expected insufficient-results, got {other:?}"),
        }
    }

    #[test]
    fn decode_duplicate_alphas_rejected() {
        let cfg = SchemeConfig::new(1, 2, 1, 1, 1); // R = 2
        let results = vec![
            WorkerResult {
                alpha: 0.5,
                y: Vector::zeros(1),
            },
            WorkerResult {
                alpha: 0.5,
                y: Vector::zeros(1),
            },
        ];
        assert!(matches!(
            decode(&results, &cfg),
            Err(Error::InvalidNodes(_))
        ));
    }

    #[test]
    fn decode_matches_direct_composite_evaluation() {
        // Full pipeline with random nets: decoding from R nodes reproduces
        // h(e(β)) to near machine precision.
        let cfg = small_cfg(); // G=1, P=2 → R=3
        let params = SchemeParams::init(&cfg, 21);
        let inputs = random_inputs(&cfg, 22);
        let enc = derive_encoder_coeffs(&params.encoders, &inputs, &cfg).unwrap();
        let comp =
            derive_computation_coeffs(&params.lambda0, &params.v_rest, &inputs, &cfg).unwrap();

        let r = cfg.recovery_threshold();
        let results: Vec<WorkerResult> = default_alphas(r)
            .iter()
            .map(|&a| WorkerResult {
                alpha: a,
                y: worker_compute(&comp, &encode(&enc, a)).unwrap(),
            })
            .collect();
        let decoded = decode(&results, &cfg).unwrap();
        for (f_hat, &beta) in decoded.iter().zip(cfg.betas.iter()) {
            let direct = worker_compute(&comp, &encode(&enc, beta)).unwrap();
            let num = f_hat.sub(&direct).unwrap().norm();
            let den = direct.norm().max(1e-300);
            assert!(num / den < 1e-8, "relative error {}", num / den);
        }
    }

    #[test]
    fn cost_examples() {
        let f = Vector::from_vec(vec![1.0, 0.0]);
        assert_eq!(CostKind::Norm.eval(&f, &f).unwrap(), 0.0);
        let zero = Vector::zeros(2);
        assert_eq!(CostKind::Norm.eval(&f, &zero).unwrap(), 1.0);
        let mut rng = substream(5, &[stream::EVAL]);
        let a = Vector::from_vec((0..4).map(|_| rng.random_range(-2.0..2.0)).collect());
        let b = Vector::from_vec((0..4).map(|_| rng.random_range(-2.0..2.0)).collect());
        let direct = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!((CostKind::Norm.eval(&a, &b).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn cost_eigvec_examples() {
        // unit-norm exact match → 0
        let f = Vector::from_vec(vec![1.0, 0.0]);
        assert_eq!(CostKind::UnitNormPenalty.eval(&f, &f).unwrap(), 0.0);
        // f̂ = 2f with ‖f‖ = 1 → ‖f‖ + 5(2−1)² = 6
        let f_hat = Vector::from_vec(vec![2.0, 0.0]);
        assert!((CostKind::UnitNormPenalty.eval(&f_hat, &f).unwrap() - 6.0).abs() < 1e-12);
        // random f̂: C + 5(‖f̂‖−1)²
        let mut rng = substream(6, &[stream::EVAL]);
        let a = Vector::from_vec((0..3).map(|_| rng.random_range(-1.0..1.0)).collect());
        let b = Vector::from_vec((0..3).map(|_| rng.random_range(-1.0..1.0)).collect());
        let expected =
            CostKind::Norm.eval(&a, &b).unwrap() + 5.0 * (a.norm() - 1.0) * (a.norm() - 1.0);
        assert!((CostKind::UnitNormPenalty.eval(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_duplicate_betas() {
        let cfg = SchemeConfig::new(2, 2, 1, 1, 2).with_betas(vec![0.5, 0.5]);
        assert!(cfg.validate().is_err());
    }
}
