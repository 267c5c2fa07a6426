//! Barycentric Lagrange interpolation (second form), shared by the learned
//! scheme's decoder and the LCC baseline.
//!
//! Weights are precomputed once per node set; evaluation per point is O(R)
//! and stable for the modest node counts used here.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Interpolation nodes with precomputed barycentric weights.
#[derive(Clone, Debug)]
pub struct BarycentricNodes {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// How a query point combines the node values.
pub enum EvalWeights {
    /// The query coincides with a node; its value is returned verbatim.
    AtNode(usize),
    /// Normalized cardinal weights: result = Σ cⱼ·yⱼ.
    Blend(Vec<f64>),
}

impl BarycentricNodes {
    /// Precomputes weights `wⱼ = 1/∏_{k≠j}(xⱼ−xₖ)`. Rejects duplicate nodes.
    pub fn new(nodes: &[f64]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidNodes("empty node set".into()));
        }
        let n = nodes.len();
        let mut weights = vec![1.0; n];
        for j in 0..n {
            for k in 0..n {
                if k == j {
                    continue;
                }
                let d = nodes[j] - nodes[k];
                if d == 0.0 {
                    return Err(Error::InvalidNodes(format!(
                        "duplicate node {} at indices {j} and {k}",
                        nodes[j]
                    )));
                }
                weights[j] /= d;
            }
        }
        Ok(BarycentricNodes {
            nodes: nodes.to_vec(),
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Cardinal weights of the interpolant at `x`.
    pub fn eval_weights(&self, x: f64) -> EvalWeights {
        if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
            return EvalWeights::AtNode(j);
        }
        let mut c: Vec<f64> = self
            .nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(&xj, &wj)| wj / (x - xj))
            .collect();
        let denom: f64 = c.iter().sum();
        for v in c.iter_mut() {
            *v /= denom;
        }
        EvalWeights::Blend(c)
    }

    /// Scalar interpolation through `(nodes[j], values[j])`.
    pub fn eval(&self, values: &[f64], x: f64) -> f64 {
        match self.eval_weights(x) {
            EvalWeights::AtNode(j) => values[j],
            EvalWeights::Blend(c) => c.iter().zip(values.iter()).map(|(&c, &y)| c * y).sum(),
        }
    }
}

/// Vector-valued interpolating polynomial in node/value form.
///
/// Fitting R nodes represents the unique polynomial of degree R−1 through
/// them; evaluation at any original node reproduces that node's value.
#[derive(Clone, Debug)]
pub struct InterpolatedPoly {
    nodes: BarycentricNodes,
    values: Vec<Vector>,
}

impl InterpolatedPoly {
    pub fn fit(nodes: &[f64], values: Vec<Vector>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::DimMismatch {
                context: "interpolation nodes vs values",
                expected: nodes.len(),
                got: values.len(),
            });
        }
        let dim = values.first().map(|v| v.len()).unwrap_or(0);
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidNodes(
                "interpolation values have mixed dimensions".into(),
            ));
        }
        Ok(InterpolatedPoly {
            nodes: BarycentricNodes::new(nodes)?,
            values,
        })
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Coordinatewise evaluation at `x`.
    pub fn eval(&self, x: f64) -> Vector {
        match self.nodes.eval_weights(x) {
            EvalWeights::AtNode(j) => self.values[j].clone(),
            EvalWeights::Blend(c) => {
                let dim = self.values.first().map(|v| v.len()).unwrap_or(0);
                let mut out = vec![0.0; dim];
                for (cj, yj) in c.iter().zip(self.values.iter()) {
                    for (o, &y) in out.iter_mut().zip(yj.iter()) {
                        *o += cj * y;
                    }
                }
                Vector::from_vec(out)
            }
        }
    }
}

/// Entrywise matrix-valued interpolation through `(nodes[j], values[j])`.
pub fn interp_matrices(nodes: &BarycentricNodes, values: &[Matrix], x: f64) -> Matrix {
    match nodes.eval_weights(x) {
        EvalWeights::AtNode(j) => values[j].clone(),
        EvalWeights::Blend(c) => {
            let rows = values[0].rows();
            let cols = values[0].cols();
            let mut out = Matrix::zeros(rows, cols);
            for (cj, yj) in c.iter().zip(values.iter()) {
                out.axpy(*cj, yj).expect("uniform matrix dims");
            }
            out
        }
    }
}
