//! End-to-end training: forward pass through encoder and computation
//! polynomials at the anchor scalars, exact reverse-mode gradients for
//! every parameter group, and the epoch/batch loop.
//!
//! Training evaluates f̂_k = h(e(β_k)) directly; interpolating from R
//! worker results reproduces exactly these values, so the quantity
//! minimized here is the quantity decoding returns.

use super::{
    encode, flatten_inputs, ComputationCoefficients, CostKind, EncoderCoefficients, SchemeConfig,
    SchemeParams,
};
use crate::datagen::{make_batch, ProblemSpec};
use crate::error::{Error, Result};
use crate::linalg::{mat_powers, Matrix, Vector};
use crate::nn::{AdamConfig, AdamState, Tape};
use crate::rng::stream;

/// Everything recorded during one instance's forward pass.
pub struct InstanceTrace {
    enc_tapes: Vec<Tape>,
    lam_tape: Tape,
    comp: ComputationCoefficients,
    anchors: Vec<AnchorTrace>,
    /// Mean cost over the K anchors.
    pub loss: f64,
}

struct AnchorTrace {
    beta: f64,
    powers: Vec<Matrix>,
    cost_grad: Vector,
}

/// Forward pass over one input set: derives coefficients once, evaluates
/// f̂_k = h(e(β_k)) per anchor, and scores against the targets.
pub fn forward_train(
    params: &SchemeParams,
    cfg: &SchemeConfig,
    inputs: &[Matrix],
    targets: &[Vector],
    cost: CostKind,
) -> Result<InstanceTrace> {
    if targets.len() != cfg.k {
        return Err(Error::DimMismatch {
            context: "target count",
            expected: cfg.k,
            got: targets.len(),
        });
    }
    let z = flatten_inputs(inputs, cfg)?;

    let mut us = Vec::with_capacity(cfg.g + 1);
    let mut enc_tapes = Vec::with_capacity(cfg.g + 1);
    for net in &params.encoders {
        let (out, tape) = net.forward(&z)?;
        us.push(Matrix::from_col_major(cfg.m, cfg.m, out.into_vec())?);
        enc_tapes.push(tape);
    }
    let coeffs = EncoderCoefficients { us };

    let (lam_out, lam_tape) = params.lambda0.forward(&z)?;
    let v0 = Matrix::from_col_major(cfg.v, cfg.m * cfg.m, lam_out.into_vec())?;
    let mut vs = Vec::with_capacity(cfg.p + 1);
    let mut from_network = Vec::with_capacity(cfg.p + 1);
    vs.push(v0);
    from_network.push(true);
    for m in &params.v_rest {
        vs.push(m.clone());
        from_network.push(false);
    }
    let comp = ComputationCoefficients { vs, from_network };

    let mut anchors = Vec::with_capacity(cfg.k);
    let mut loss = 0.0;
    for (k, &beta) in cfg.betas.iter().enumerate() {
        let x_tilde = encode(&coeffs, beta);
        let powers = mat_powers(&x_tilde, cfg.p)?;
        let mut f_hat = Vector::zeros(cfg.v);
        for (vp, w) in comp.vs.iter().zip(powers.iter()) {
            let term = vp.matvec(w.as_slice())?;
            for (yi, ti) in f_hat.iter_mut().zip(term.iter()) {
                *yi += ti;
            }
        }
        let (c, cost_grad) = cost.eval_with_grad(&f_hat, &targets[k])?;
        loss += c;
        anchors.push(AnchorTrace {
            beta,
            powers,
            cost_grad,
        });
    }
    loss /= cfg.k as f64;

    Ok(InstanceTrace {
        enc_tapes,
        lam_tape,
        comp,
        anchors,
        loss,
    })
}

/// target[i,j] += s · x[i] · y[j]
fn add_outer(target: &mut Matrix, x: &[f64], y: &[f64], s: f64) {
    let rows = target.rows();
    debug_assert_eq!(rows, x.len());
    debug_assert_eq!(target.cols(), y.len());
    let data = target.as_mut_slice();
    for (j, &yj) in y.iter().enumerate() {
        if yj == 0.0 {
            continue;
        }
        let col = &mut data[j * rows..(j + 1) * rows];
        let f = s * yj;
        for (c, &xi) in col.iter_mut().zip(x.iter()) {
            *c += f * xi;
        }
    }
}

/// Accumulates `weight · ∂(instance loss)/∂θ` into `grads` for every
/// parameter group: the standalone V_p matrices, Λ₀ (through V_0), and
/// each encoder network (through the matrix powers of the encoded input).
///
/// The matrix-power adjoint uses the product rule: for W_p = X̃ᵖ and an
/// upstream dW_p, the contribution is Σᵢ (X̃ᵀ)ⁱ · dW_p · (X̃ᵀ)^(p−1−i).
pub fn accumulate_gradients(
    params: &SchemeParams,
    cfg: &SchemeConfig,
    trace: &InstanceTrace,
    weight: f64,
    grads: &mut SchemeParams,
) -> Result<()> {
    let m2 = cfg.m * cfg.m;
    let mut du: Vec<Matrix> = (0..=cfg.g).map(|_| Matrix::zeros(cfg.m, cfg.m)).collect();
    let mut dv0 = Matrix::zeros(cfg.v, m2);
    let anchor_scale = weight / cfg.k as f64;

    for anchor in &trace.anchors {
        let gk: Vec<f64> = anchor.cost_grad.iter().map(|g| g * anchor_scale).collect();

        // dV_p += gk ⊗ vec(X̃ᵖ)
        add_outer(&mut dv0, &gk, anchor.powers[0].as_slice(), 1.0);
        for p in 1..=cfg.p {
            add_outer(
                &mut grads.v_rest[p - 1],
                &gk,
                anchor.powers[p].as_slice(),
                1.0,
            );
        }

        // dX̃ from every power term
        let transposed: Vec<Matrix> = anchor.powers[..cfg.p]
            .iter()
            .map(|w| w.transpose())
            .collect();
        let mut dx_tilde = Matrix::zeros(cfg.m, cfg.m);
        for p in 1..=cfg.p {
            let dvec = trace.comp.vs[p].matvec_t(&gk)?;
            let dw = Matrix::from_col_major(cfg.m, cfg.m, dvec.into_vec())?;
            for i in 0..p {
                let term = transposed[i].matmul(&dw)?.matmul(&transposed[p - 1 - i])?;
                dx_tilde.axpy(1.0, &term)?;
            }
        }

        // X̃ = Σ U_g βᵍ  →  dU_g += βᵍ · dX̃
        let mut beta_pow = 1.0;
        for dug in du.iter_mut() {
            dug.axpy(beta_pow, &dx_tilde)?;
            beta_pow *= anchor.beta;
        }
    }

    for (g, dug) in du.into_iter().enumerate() {
        let dout = Vector::from_vec(dug.as_slice().to_vec());
        let (net_grads, _) = params.encoders[g].backward(&trace.enc_tapes[g], &dout)?;
        grads.encoders[g].add_scaled(&net_grads, 1.0)?;
    }
    let dout = Vector::from_vec(dv0.as_slice().to_vec());
    let (lam_grads, _) = params.lambda0.backward(&trace.lam_tape, &dout)?;
    grads.lambda0.add_scaled(&lam_grads, 1.0)?;
    Ok(())
}

/// Central finite differences (h = 1e-5) over every scheme parameter
/// against the analytic gradient of the instance loss; returns the worst
/// relative discrepancy (absolute floor 1e-3 in the denominator).
pub fn fd_check_scheme(
    params: &SchemeParams,
    cfg: &SchemeConfig,
    inputs: &[Matrix],
    targets: &[Vector],
    cost: CostKind,
) -> Result<f64> {
    let trace = forward_train(params, cfg, inputs, targets, cost)?;
    let mut grads = SchemeParams::zeros(cfg);
    accumulate_gradients(params, cfg, &trace, 1.0, &mut grads)?;
    let analytic = grads.to_flat();

    let h = 1e-5;
    let mut flat = params.to_flat();
    let mut probe = SchemeParams::zeros(cfg);
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let orig = flat[i];
        flat[i] = orig + h;
        probe.assign_from_flat(&flat)?;
        let lp = forward_train(&probe, cfg, inputs, targets, cost)?.loss;
        flat[i] = orig - h;
        probe.assign_from_flat(&flat)?;
        let lm = forward_train(&probe, cfg, inputs, targets, cost)?.loss;
        flat[i] = orig;
        let numeric = (lp - lm) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-3);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Accumulate gradients over a full epoch before updating, instead of
    /// the default per-batch update.
    pub per_epoch_update: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 50,
            batches_per_epoch: 20,
            batch_size: 16,
            adam: AdamConfig::default(),
            per_epoch_update: false,
        }
    }
}

/// Details of a non-finite loss or gradient that stopped training early.
#[derive(Clone, Debug)]
pub struct NanAbort {
    pub epoch: usize,
    pub batch: usize,
    pub reason: String,
}

pub struct TrainOutcome {
    /// Parameters of the epoch with minimum mean loss (the initialization
    /// when no epoch ran or improved).
    pub params: SchemeParams,
    pub best_epoch: Option<usize>,
    pub best_loss: f64,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// Set when training stopped on a non-finite loss/gradient; `params`
    /// then holds the last good (best-so-far) state.
    pub aborted: Option<NanAbort>,
}

/// Full training loop. Fresh data is sampled for every batch from the
/// (seed, epoch, batch, instance) substream, so runs replay exactly.
pub fn train_scheme(
    cfg: &SchemeConfig,
    problem: &ProblemSpec,
    opts: &TrainOptions,
    seed: u64,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if problem.output_dim() != cfg.v {
        return Err(Error::Config(format!(
            "problem output dimension {} does not match scheme v {}",
            problem.output_dim(),
            cfg.v
        )));
    }
    let cost = problem.cost_kind();
    let mut params = SchemeParams::init(cfg, seed);
    let mut adam = AdamState::new(params.num_params(), opts.adam);

    let mut best_flat = params.to_flat();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = None;
    let mut epoch_losses = Vec::with_capacity(opts.epochs);
    let mut aborted = None;

    'epochs: for epoch in 0..opts.epochs {
        let mut epoch_grads = if opts.per_epoch_update {
            Some(SchemeParams::zeros(cfg))
        } else {
            None
        };
        let mut loss_sum = 0.0;
        let mut n_instances = 0usize;

        for batch in 0..opts.batches_per_epoch {
            let instances = make_batch(
                problem,
                cfg.k,
                opts.batch_size,
                seed,
                &[stream::TRAIN, epoch as u64, batch as u64],
            )?;
            let mut batch_grads = SchemeParams::zeros(cfg);
            let inv_b = 1.0 / instances.len() as f64;
            let mut bad_loss = false;
            for inst in &instances {
                let trace = forward_train(&params, cfg, &inst.inputs, &inst.targets, cost)?;
                if !trace.loss.is_finite() {
                    bad_loss = true;
                    break;
                }
                loss_sum += trace.loss;
                n_instances += 1;
                accumulate_gradients(&params, cfg, &trace, inv_b, &mut batch_grads)?;
            }
            if bad_loss {
                aborted = Some(NanAbort {
                    epoch,
                    batch,
                    reason: "non-finite loss".into(),
                });
                break 'epochs;
            }

            if let Some(acc) = epoch_grads.as_mut() {
                let scale = 1.0 / opts.batches_per_epoch as f64;
                for (e, b) in acc.encoders.iter_mut().zip(batch_grads.encoders.iter()) {
                    e.add_scaled(b, scale)?;
                }
                acc.lambda0.add_scaled(&batch_grads.lambda0, scale)?;
                for (a, b) in acc.v_rest.iter_mut().zip(batch_grads.v_rest.iter()) {
                    a.axpy(scale, b)?;
                }
            } else if let Some(reason) = step_params(&mut adam, &mut params, &batch_grads)? {
                aborted = Some(NanAbort {
                    epoch,
                    batch,
                    reason,
                });
                break 'epochs;
            }
        }

        if let Some(acc) = epoch_grads {
            if let Some(reason) = step_params(&mut adam, &mut params, &acc)? {
                aborted = Some(NanAbort {
                    epoch,
                    batch: opts.batches_per_epoch,
                    reason,
                });
                break 'epochs;
            }
        }

        let mean_loss = loss_sum / n_instances.max(1) as f64;
        epoch_losses.push(mean_loss);
        if mean_loss < best_loss {
            best_loss = mean_loss;
            best_epoch = Some(epoch);
            best_flat = params.to_flat();
        }
    }

    let mut best_params = SchemeParams::zeros(cfg);
    best_params.assign_from_flat(&best_flat)?;
    Ok(TrainOutcome {
        params: best_params,
        best_epoch,
        best_loss,
        epoch_losses,
        aborted,
    })
}

/// One optimizer step; maps a non-finite-gradient rejection to a
/// diagnostic string instead of an error so the caller can keep the last
/// good parameters.
fn step_params(
    adam: &mut AdamState,
    params: &mut SchemeParams,
    grads: &SchemeParams,
) -> Result<Option<String>> {
    let mut flat = params.to_flat();
    match adam.apply(&mut flat, &grads.to_flat()) {
        Ok(()) => {
            params.assign_from_flat(&flat)?;
            Ok(None)
        }
        Err(Error::NanGradient { context }) => Ok(Some(format!("non-finite gradient ({context})"))),
        Err(e) => Err(e),
    }
}
