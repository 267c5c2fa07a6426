//! Exact Lagrange coded computation for matrix polynomials.
//!
//! Inputs are encoded as evaluations of the degree-(K−1) matrix Lagrange
//! polynomial through (β_k, X_k); workers apply a degree-d matrix
//! polynomial f, so the composite has degree (K−1)·d and any
//! R = (K−1)·d + 1 results recover every f(X_k) exactly (up to floating
//! point). Serves as the correctness anchor for the learned scheme.

use crate::error::{Error, Result};
use crate::interp::{interp_matrices, BarycentricNodes};
use crate::linalg::{mat_pow, Matrix};
use crate::scheme::{default_alphas, default_betas};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct LccConfig {
    /// Number of inputs.
    pub k: usize,
    /// Degree of the matrix polynomial computed by the workers.
    pub degree: usize,
    /// Interpolation anchors carrying the inputs.
    pub betas: Vec<f64>,
    /// Worker evaluation nodes.
    pub alphas: Vec<f64>,
}

impl LccConfig {
    /// Anchors β_k = k/K and nodes α_n = n/(N+1). N may be below the
    /// recovery threshold; encoding still works, decoding will refuse.
    pub fn new(k: usize, degree: usize, n_workers: usize) -> Self {
        LccConfig {
            k,
            degree,
            betas: default_betas(k),
            alphas: default_alphas(n_workers),
        }
    }

    pub fn recovery_threshold(&self) -> usize {
        lcc_recovery_threshold(self.k, self.degree)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.degree == 0 {
            return Err(Error::Config("lcc needs k ≥ 1 and degree ≥ 1".into()));
        }
        if self.betas.len() != self.k {
            return Err(Error::Config(format!(
                "need {} anchors, got {}",
                self.k,
                self.betas.len()
            )));
        }
        // Node distinctness surfaces early instead of at weight computation.
        BarycentricNodes::new(&self.betas)?;
        BarycentricNodes::new(&self.alphas)?;
        Ok(())
    }
}

/// R = (K−1)·d + 1.
pub fn lcc_recovery_threshold(k: usize, degree: usize) -> usize {
    (k - 1) * degree + 1
}

/// A worker's output: evaluation node and the matrix f(X̃_n).
#[derive(Clone, Debug)]
pub struct LccWorkerResult {
    pub alpha: f64,
    pub y: Matrix,
}

/// X̃_n = u(α_n) where u is the degree-(K−1) matrix Lagrange polynomial
/// with u(β_k) = X_k.
pub fn lcc_encode(inputs: &[Matrix], cfg: &LccConfig) -> Result<Vec<Matrix>> {
    cfg.validate()?;
    if inputs.len() != cfg.k {
        return Err(Error::DimMismatch {
            context: "lcc input count",
            expected: cfg.k,
            got: inputs.len(),
        });
    }
    let first = &inputs[0];
    if !first.is_square() {
        return Err(Error::NotSquare {
            rows: first.rows(),
            cols: first.cols(),
        });
    }
    for x in inputs {
        if x.rows() != first.rows() || x.cols() != first.cols() {
            return Err(Error::DimMismatch {
                context: "lcc input dimensions",
                expected: first.rows(),
                got: x.rows(),
            });
        }
    }
    let anchors = BarycentricNodes::new(&cfg.betas)?;
    Ok(cfg
        .alphas
        .iter()
        .map(|&a| interp_matrices(&anchors, inputs, a))
        .collect())
}

/// Interpolates the degree-(K−1)·d composite polynomial from the first R
/// results and evaluates it at the anchors, recovering all f(X_k).
pub fn lcc_decode(results: &[LccWorkerResult], cfg: &LccConfig) -> Result<Vec<Matrix>> {
    let r = cfg.recovery_threshold();
    if results.len() < r {
        return Err(Error::insufficient(r, results.len()));
    }
    let used = &results[..r];
    let nodes: Vec<f64> = used.iter().map(|w| w.alpha).collect();
    let values: Vec<Matrix> = used.iter().map(|w| w.y.clone()).collect();
    let nodes = BarycentricNodes::new(&nodes)?;
    Ok(cfg
        .betas
        .iter()
        .map(|&b| interp_matrices(&nodes, &values, b))
        .collect())
}

/// Baseline matrix polynomials to run through the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LccFunction {
    /// f(X) = X², degree 2.
    Square,
    /// f(X) = X³, degree 3.
    Cube,
    /// f(X) = X² + X, degree 2.
    SquarePlusX,
}

impl LccFunction {
    pub fn degree(&self) -> usize {
        match self {
            LccFunction::Square | LccFunction::SquarePlusX => 2,
            LccFunction::Cube => 3,
        }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            LccFunction::Square => mat_pow(x, 2),
            LccFunction::Cube => mat_pow(x, 3),
            LccFunction::SquarePlusX => {
                let mut out = mat_pow(x, 2)?;
                out.axpy(1.0, x)?;
                Ok(out)
            }
        }
    }

    pub fn cli_name(&self) -> &'static str {
        match self {
            LccFunction::Square => "square",
            LccFunction::Cube => "cube",
            LccFunction::SquarePlusX => "square-plus-x",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LccFunction::Square),
            "cube" => Ok(LccFunction::Cube),
            "square-plus-x" => Ok(LccFunction::SquarePlusX),
            other => Err(Error::Config(format!(
                "unknown lcc function '{other}' (expected square|cube|square-plus-x)"
            ))),
        }
    }
}
