//! Seeded input samplers and oracle targets for the four target problems.
//!
//! Every instance is freshly sampled from its own RNG substream, keyed by
//! (seed, stream, epoch, batch, instance), so datasets never repeat across
//! iterations yet replay exactly under the same seed.

use crate::error::{Error, Result};
use crate::linalg::{
    dominant_eigenvector, lu_determinant, matrix_exp, operator_norm, sym_eigenvalues, Matrix,
    Vector,
};
use crate::rng::substream;
use crate::scheme::CostKind;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The four target computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemId {
    /// All eigenvalues of a symmetric matrix, sorted ascending.
    Eigenvalues,
    /// Unit-norm dominant eigenvector, first nonzero component positive.
    Eigenvector,
    /// Matrix exponential.
    Exponential,
    /// Determinant.
    Determinant,
}

impl ProblemId {
    pub fn cli_name(&self) -> &'static str {
        match self {
            ProblemId::Eigenvalues => "eig",
            ProblemId::Eigenvector => "eigvec",
            ProblemId::Exponential => "expm",
            ProblemId::Determinant => "det",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "eig" => Ok(ProblemId::Eigenvalues),
            "eigvec" => Ok(ProblemId::Eigenvector),
            "expm" => Ok(ProblemId::Exponential),
            "det" => Ok(ProblemId::Determinant),
            other => Err(Error::Config(format!(
                "unknown problem '{other}' (expected eig|eigvec|expm|det)"
            ))),
        }
    }
}

/// A problem bound to a matrix dimension: sampler, oracle, output
/// dimension, and cost selector.
#[derive(Clone, Copy, Debug)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub m: usize,
}

/// One training/evaluation instance: K inputs and their oracle targets.
pub struct Instance {
    pub inputs: Vec<Matrix>,
    pub targets: Vec<Vector>,
}

const MAX_RETRIES: usize = 100;

impl ProblemSpec {
    pub fn new(id: ProblemId, m: usize) -> Self {
        ProblemSpec { id, m }
    }

    /// Output dimension V: M, M, M², 1.
    pub fn output_dim(&self) -> usize {
        match self.id {
            ProblemId::Eigenvalues | ProblemId::Eigenvector => self.m,
            ProblemId::Exponential => self.m * self.m,
            ProblemId::Determinant => 1,
        }
    }

    /// The eigenvector problem trains with the unit-norm penalty.
    pub fn cost_kind(&self) -> CostKind {
        match self.id {
            ProblemId::Eigenvector => CostKind::UnitNormPenalty,
            _ => CostKind::Norm,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Matrix> {
        let m = self.m;
        match self.id {
            ProblemId::Eigenvalues => Ok(symmetrized(m, rng, -1.0, 1.0)),
            ProblemId::Eigenvector => Ok(symmetrized(m, rng, 0.0, 1.0)),
            ProblemId::Exponential => {
                let a = Matrix::from_fn(m, m, |_, _| rng.random_range(0.0..1.0));
                let norm = operator_norm(&a)?;
                Ok(a.scale(1.0 / norm))
            }
            ProblemId::Determinant => {
                let bound = 2.0 / m as f64;
                Ok(Matrix::from_fn(m, m, |i, j| {
                    if i == j {
                        1.0
                    } else {
                        rng.random_range(-bound..bound)
                    }
                }))
            }
        }
    }

    /// Exact target as a flat vector of length `output_dim`.
    pub fn oracle(&self, x: &Matrix) -> Result<Vector> {
        let out = match self.id {
            ProblemId::Eigenvalues => sym_eigenvalues(x)?,
            ProblemId::Eigenvector => dominant_eigenvector(x)?,
            ProblemId::Exponential => matrix_exp(x)?.vec(),
            ProblemId::Determinant => Vector::from_vec(vec![lu_determinant(x)?]),
        };
        if !out.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "oracle for {:?} produced non-finite output",
                self.id
            )));
        }
        Ok(out)
    }

    /// Samples until the oracle accepts, up to a bounded retry budget
    /// (degenerate draws have probability zero but adversarial seeds
    /// should fail loudly rather than loop).
    pub fn sample_with_target(&self, rng: &mut ChaCha8Rng) -> Result<(Matrix, Vector)> {
        let mut last_reason = String::new();
        for _ in 0..MAX_RETRIES {
            let x = self.sample(rng)?;
            match self.oracle(&x) {
                Ok(target) => return Ok((x, target)),
                Err(Error::DegenerateInput(reason)) => last_reason = reason,
                Err(e) => return Err(e),
            }
        }
        Err(Error::ResampleExhausted {
            retries: MAX_RETRIES,
            reason: last_reason,
        })
    }
}

fn symmetrized(m: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Matrix {
    let a = Matrix::from_fn(m, m, |_, _| rng.random_range(lo..hi));
    Matrix::from_fn(m, m, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)))
}

/// `batch_size` independent K-tuples with oracle targets attached. Each
/// instance draws from substream `path ++ [instance]`.
pub fn make_batch(
    problem: &ProblemSpec,
    k: usize,
    batch_size: usize,
    seed: u64,
    path: &[u64],
) -> Result<Vec<Instance>> {
    let mut batch = Vec::with_capacity(batch_size);
    for instance in 0..batch_size {
        let mut full_path = path.to_vec();
        full_path.push(instance as u64);
        let mut rng = substream(seed, &full_path);
        let mut inputs = Vec::with_capacity(k);
        let mut targets = Vec::with_capacity(k);
        for _ in 0..k {
            let (x, t) = problem.sample_with_target(&mut rng)?;
            inputs.push(x);
            targets.push(t);
        }
        batch.push(Instance { inputs, targets });
    }
    Ok(batch)
}

/// Dumps a batch as CSV: one row per instance with the flattened inputs,
/// flattened targets, and the seed coordinates that produced it.
pub fn write_batch_csv<W: std::io::Write>(
    mut w: W,
    batch: &[Instance],
    seed: u64,
    path: &[u64],
) -> Result<()> {
    writeln!(w, "# seed={seed} path={path:?}")?;
    writeln!(w, "instance,k,inputs,targets")?;
    for (i, inst) in batch.iter().enumerate() {
        for (k, (x, t)) in inst.inputs.iter().zip(inst.targets.iter()).enumerate() {
            let xs: Vec<String> = x.as_slice().iter().map(|v| v.to_string()).collect();
            let ts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{i},{k},{},{}", xs.join(";"), ts.join(";"))?;
        }
    }
    Ok(())
}
