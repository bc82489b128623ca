//! Dense-tensor reverse-mode automatic differentiation.
//!
//! A [`Graph`] records operations as they are evaluated; [`Graph::backward`]
//! then sweeps the tape in reverse and returns per-node gradients. Model
//! parameters live in a [`ParamSet`] outside the graph so that several graphs
//! (one per sample) can read the same weights concurrently and their
//! [`GradBuffer`]s can be reduced afterwards in a fixed order.

pub mod checkpoint;
pub mod gradcheck;
mod graph;
pub mod nn;
pub mod optim;
mod sparse;
mod tensor;

use thiserror::Error;

pub use graph::{kernel_points, Gradients, Graph, KernelCorrelationInput, Var, PAD};
pub use nn::{GradBuffer, Linear, Mlp, ParamId, ParamSet, Parameter};
pub use optim::{adam_step, Adam, AdamConfig, AdamState};
pub use sparse::SparseMatrix;
pub use tensor::Tensor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("data of length {len} does not fit shape {shape:?}")]
    DataLength { len: usize, shape: Vec<usize> },
    #[error("backward needs a single-element output, got shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("row index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Invalid(String),
}

pub type TensorResult<T> = Result<T, TensorError>;
