//! Normalized graph Laplacian and truncated Chebyshev graph convolution.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::autodiff::nn::glorot_uniform;
use crate::autodiff::{Graph, ParamId, ParamSet, SparseMatrix, Tensor, TensorResult, Var};
use crate::mesh::TriMesh;

#[derive(Debug, Error, PartialEq)]
pub enum LaplacianError {
    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(usize),
}

/// `L~ = 2 L / lambda_max - I` with `L = I - D^-1/2 A D^-1/2`.
#[derive(Clone, Debug)]
pub struct ScaledLaplacian {
    pub matrix: Arc<SparseMatrix>,
    pub lambda_max: f64,
}

impl ScaledLaplacian {
    pub fn vertex_count(&self) -> usize {
        self.matrix.rows()
    }
}

/// `I - D^-1/2 A D^-1/2` for an adjacency list.
pub fn laplacian_matrix(adjacency: &[Vec<usize>]) -> Result<SparseMatrix, LaplacianError> {
    let n = adjacency.len();
    let inv_sqrt: Vec<f64> = adjacency
        .iter()
        .enumerate()
        .map(|(v, nb)| {
            if nb.is_empty() {
                Err(LaplacianError::IsolatedVertex(v))
            } else {
                Ok(1.0 / (nb.len() as f64).sqrt())
            }
        })
        .collect::<Result<_, _>>()?;
    let mut t = Vec::with_capacity(n + adjacency.iter().map(Vec::len).sum::<usize>());
    for (v, nb) in adjacency.iter().enumerate() {
        t.push((v, v, 1.0));
        for &w in nb {
            t.push((v, w, -inv_sqrt[v] * inv_sqrt[w]));
        }
    }
    Ok(SparseMatrix::from_triplets(n, n, &t))
}

/// Scaled Laplacian with `lambda_max = 2`, i.e. `L - I`.
pub fn normalized_laplacian(adjacency: &[Vec<usize>]) -> Result<ScaledLaplacian, LaplacianError> {
    let l = laplacian_matrix(adjacency)?;
    let lambda_max = 2.0;
    let t: Vec<(usize, usize, f64)> = l
        .triplets()
        .into_iter()
        .map(|(r, c, v)| (r, c, 2.0 * v / lambda_max - if r == c { 1.0 } else { 0.0 }))
        .filter(|&(_, _, v)| v != 0.0)
        .collect();
    Ok(ScaledLaplacian {
        matrix: Arc::new(SparseMatrix::from_triplets(l.rows(), l.cols(), &t)),
        lambda_max,
    })
}

pub fn mesh_laplacian(mesh: &TriMesh) -> Result<ScaledLaplacian, LaplacianError> {
    normalized_laplacian(mesh.adjacency())
}

/// `Y = sum_k T_k(L~) X theta_k + b`.
#[derive(Clone, Debug)]
pub struct ChebConv {
    pub order: usize,
    pub thetas: Vec<ParamId>,
    pub bias: ParamId,
    pub in_features: usize,
    pub out_features: usize,
}

impl ChebConv {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamSet,
        name: &str,
        order: usize,
        in_features: usize,
        out_features: usize,
        rng: &mut R,
    ) -> Self {
        assert!(order >= 1, "Chebyshev order must be positive");
        let thetas = (0..order)
            .map(|k| {
                let w = glorot_uniform(rng, &[in_features, out_features], in_features * order, out_features);
                params.add(format!("{name}.theta{k}"), w)
            })
            .collect();
        let bias = params.add(format!("{name}.bias"), Tensor::zeros(&[out_features]));
        Self {
            order,
            thetas,
            bias,
            in_features,
            out_features,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.order * self.in_features * self.out_features + self.out_features
    }

    pub fn forward(&self, g: &mut Graph, lap: &ScaledLaplacian, x: Var) -> TensorResult<Var> {
        let mut prev2 = x;
        let theta0 = g.param(self.thetas[0]);
        let mut y = g.matmul(x, theta0)?;
        if self.order > 1 {
            let mut prev = g.spmm(lap.matrix.clone(), x)?;
            let th = g.param(self.thetas[1]);
            let term = g.matmul(prev, th)?;
            y = g.add(y, term)?;
            for k in 2..self.order {
                let lp = g.spmm(lap.matrix.clone(), prev)?;
                let twice = g.scale(lp, 2.0);
                let tk = g.sub(twice, prev2)?;
                let th = g.param(self.thetas[k]);
                let term = g.matmul(tk, th)?;
                y = g.add(y, term)?;
                prev2 = prev;
                prev = tk;
            }
        }
        let b = g.param(self.bias);
        g.add_bias(y, b)
    }
}
