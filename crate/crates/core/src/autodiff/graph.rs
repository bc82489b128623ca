//! Tape of recorded tensor operations and the reverse sweep over it.

use std::sync::Arc;

use super::nn::{GradBuffer, ParamId, ParamSet};
use super::sparse::SparseMatrix;
use super::tensor::{matmul, matmul_at_acc, matmul_bt_acc, Tensor};
use super::{TensorError, TensorResult};
use crate::geom::Point3;

/// Row index meaning "no row": gathers produce a zero row for it.
pub const PAD: usize = usize::MAX;

/// Handle to a node on a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// Constant inputs of the face kernel correlation operator.
#[derive(Clone, Debug)]
pub struct KernelCorrelationInput {
    pub normals: Vec<Point3>,
    /// Three neighbour faces per face (self index where missing).
    pub neighbors: Vec<[usize; 3]>,
    pub kernels: usize,
    pub points_per_kernel: usize,
    pub sigma: f64,
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    AddBias(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Abs(Var),
    Relu(Var),
    Concat(Vec<Var>),
    Reshape(Var),
    Gather(Var, Arc<[usize]>),
    SpMM(Arc<SparseMatrix>, Var),
    MeanRows(Var),
    MaxRows(Var, Vec<usize>),
    MaxOf(Vec<Var>, Vec<u32>),
    Sum(Var),
    CrossEntropy(Var, Vec<f64>, Vec<usize>),
    KernelCorrelation(Var, Arc<KernelCorrelationInput>, Vec<f64>),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Per-node gradients produced by [`Graph::backward`].
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    pub fn wrt(&self, v: Var) -> Option<&[f64]> {
        self.grads[v.0].as_deref()
    }
}

/// Records a forward computation for one reverse sweep.
///
/// Parameters are read from a borrowed [`ParamSet`] and bound lazily, once per
/// graph, the first time [`Graph::param`] is called for them.
pub struct Graph<'p> {
    nodes: Vec<Node>,
    params: Option<&'p ParamSet>,
    param_nodes: Vec<Option<Var>>,
}

impl Default for Graph<'_> {
    fn default() -> Self {
        Self::new()
    }
}

fn mismatch(op: &'static str, a: &Tensor, b: &Tensor) -> TensorError {
    TensorError::ShapeMismatch {
        op,
        left: a.shape().to_vec(),
        right: b.shape().to_vec(),
    }
}

fn acc(dst: &mut Option<Vec<f64>>, len: usize) -> &mut Vec<f64> {
    dst.get_or_insert_with(|| vec![0.0; len])
}

impl<'p> Graph<'p> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            params: None,
            param_nodes: Vec::new(),
        }
    }

    pub fn with_params(params: &'p ParamSet) -> Self {
        Self {
            nodes: Vec::new(),
            params: Some(params),
            param_nodes: vec![None; params.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Input that does not receive gradients.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    /// Leaf that receives gradients (for checks and free-standing use).
    pub fn variable(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, true)
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.param_nodes[id.0] {
            return v;
        }
        let params = self.params.expect("graph was created without parameters");
        let v = self.push(params.get(id).value.clone(), Op::Leaf, true);
        self.param_nodes[id.0] = Some(v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> TensorResult<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (n, k) = ta.dims2();
        let (k2, m) = tb.dims2();
        if k != k2 {
            return Err(mismatch("matmul", ta, tb));
        }
        let out = matmul(ta.data(), tb.data(), n, k, m);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(Tensor::new(vec![n, m], out)?, Op::MatMul(a, b), rg))
    }

    /// Adds a `[m]` bias to every row of an `[n, m]` tensor.
    pub fn add_bias(&mut self, x: Var, b: Var) -> TensorResult<Var> {
        let (tx, tb) = (self.value(x), self.value(b));
        let (n, m) = tx.dims2();
        if tb.len() != m {
            return Err(mismatch("add_bias", tx, tb));
        }
        let mut out = tx.data().to_vec();
        for i in 0..n {
            for (o, bv) in out[i * m..(i + 1) * m].iter_mut().zip(tb.data()) {
                *o += bv;
            }
        }
        let rg = self.rg(x) || self.rg(b);
        let shape = tx.shape().to_vec();
        Ok(self.push(Tensor::new(shape, out)?, Op::AddBias(x, b), rg))
    }

    fn zip_with(
        &mut self,
        a: Var,
        b: Var,
        name: &'static str,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> TensorResult<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch(name, ta, tb));
        }
        let out: Vec<f64> = ta.data().iter().zip(tb.data()).map(|(x, y)| f(*x, *y)).collect();
        let shape = ta.shape().to_vec();
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(Tensor::new(shape, out)?, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> TensorResult<Var> {
        self.zip_with(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> TensorResult<Var> {
        self.zip_with(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> TensorResult<Var> {
        self.zip_with(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    fn map(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let t = self.value(a);
        let out: Vec<f64> = t.data().iter().map(|&x| f(x)).collect();
        let shape = t.shape().to_vec();
        let rg = self.rg(a);
        self.push(Tensor::new(shape, out).expect("same length"), op, rg)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.map(a, |x| c * x, Op::Scale(a, c))
    }

    pub fn abs(&mut self, a: Var) -> Var {
        self.map(a, f64::abs, Op::Abs(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.map(a, |x| x.max(0.0), Op::Relu(a))
    }

    /// Concatenates `[n, m_i]` tensors along columns.
    pub fn concat_cols(&mut self, parts: &[Var]) -> TensorResult<Var> {
        let first = self.value(parts[0]);
        let n = first.rows();
        for &p in &parts[1..] {
            if self.value(p).rows() != n {
                return Err(mismatch("concat_cols", first, self.value(p)));
            }
        }
        let widths: Vec<usize> = parts.iter().map(|&p| self.value(p).cols()).collect();
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(n * total);
        for i in 0..n {
            for (&p, &w) in parts.iter().zip(&widths) {
                out.extend_from_slice(&self.value(p).data()[i * w..(i + 1) * w]);
            }
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(Tensor::new(vec![n, total], out)?, Op::Concat(parts.to_vec()), rg))
    }

    pub fn reshape(&mut self, a: Var, shape: Vec<usize>) -> TensorResult<Var> {
        let t = self.value(a).clone().reshaped(shape)?;
        let rg = self.rg(a);
        Ok(self.push(t, Op::Reshape(a), rg))
    }

    /// Row `r` of the output is row `index[r]` of `x`, or zeros for [`PAD`].
    pub fn gather_rows(&mut self, x: Var, index: Arc<[usize]>) -> TensorResult<Var> {
        let t = self.value(x);
        let (n, f) = t.dims2();
        let mut out = vec![0.0; index.len() * f];
        for (r, &i) in index.iter().enumerate() {
            if i == PAD {
                continue;
            }
            if i >= n {
                return Err(TensorError::IndexOutOfRange { index: i, rows: n });
            }
            out[r * f..(r + 1) * f].copy_from_slice(&t.data()[i * f..(i + 1) * f]);
        }
        let rg = self.rg(x);
        let shape = vec![index.len(), f];
        Ok(self.push(Tensor::new(shape, out)?, Op::Gather(x, index), rg))
    }

    /// Constant sparse matrix times dense `[cols, f]` tensor.
    pub fn spmm(&mut self, s: Arc<SparseMatrix>, x: Var) -> TensorResult<Var> {
        let t = self.value(x);
        let (n, f) = t.dims2();
        if n != s.cols() {
            return Err(TensorError::ShapeMismatch {
                op: "spmm",
                left: vec![s.rows(), s.cols()],
                right: t.shape().to_vec(),
            });
        }
        let out = s.mul_dense(t.data(), f);
        let rg = self.rg(x);
        let shape = vec![s.rows(), f];
        Ok(self.push(Tensor::new(shape, out)?, Op::SpMM(s, x), rg))
    }

    /// `[n, f] -> [1, f]` column means.
    pub fn mean_rows(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let (n, f) = t.dims2();
        let mut out = vec![0.0; f];
        for i in 0..n {
            for (o, v) in out.iter_mut().zip(t.row(i)) {
                *o += v;
            }
        }
        let inv = 1.0 / n.max(1) as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        let rg = self.rg(x);
        self.push(Tensor::new(vec![1, f], out).expect("len"), Op::MeanRows(x), rg)
    }

    /// `[n, f] -> [1, f]` column maxima (first maximal row wins ties).
    pub fn max_rows(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let (n, f) = t.dims2();
        let mut out = vec![f64::NEG_INFINITY; f];
        let mut arg = vec![0usize; f];
        for i in 0..n {
            for (c, &v) in t.row(i).iter().enumerate() {
                if v > out[c] {
                    out[c] = v;
                    arg[c] = i;
                }
            }
        }
        let rg = self.rg(x);
        self.push(Tensor::new(vec![1, f], out).expect("len"), Op::MaxRows(x, arg), rg)
    }

    /// Elementwise maximum over same-shaped tensors (earliest input wins ties).
    pub fn max_of(&mut self, parts: &[Var]) -> TensorResult<Var> {
        let first = self.value(parts[0]);
        for &p in &parts[1..] {
            if self.value(p).shape() != first.shape() {
                return Err(mismatch("max_of", first, self.value(p)));
            }
        }
        let mut out = first.data().to_vec();
        let mut choice = vec![0u32; out.len()];
        for (k, &p) in parts.iter().enumerate().skip(1) {
            for (i, &v) in self.value(p).data().iter().enumerate() {
                if v > out[i] {
                    out[i] = v;
                    choice[i] = k as u32;
                }
            }
        }
        let shape = self.value(parts[0]).shape().to_vec();
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(Tensor::new(shape, out)?, Op::MaxOf(parts.to_vec(), choice), rg))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s: f64 = self.value(x).data().iter().sum();
        let rg = self.rg(x);
        self.push(Tensor::scalar(s), Op::Sum(x), rg)
    }

    /// Mean over the batch of `-log softmax(logits)[label]`, max-subtracted.
    pub fn cross_entropy(&mut self, logits: Var, labels: &[usize]) -> TensorResult<Var> {
        let t = self.value(logits);
        let (b, c) = t.dims2();
        if labels.len() != b {
            return Err(TensorError::ShapeMismatch {
                op: "cross_entropy",
                left: t.shape().to_vec(),
                right: vec![labels.len()],
            });
        }
        let mut probs = vec![0.0; b * c];
        let mut loss = 0.0;
        for (i, &y) in labels.iter().enumerate() {
            if y >= c {
                return Err(TensorError::LabelOutOfRange { label: y, classes: c });
            }
            let row = t.row(i);
            let mx = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = row.iter().map(|v| (v - mx).exp()).sum();
            for (j, v) in row.iter().enumerate() {
                probs[i * c + j] = (v - mx).exp() / z;
            }
            loss += z.ln() - (row[y] - mx);
        }
        loss /= b as f64;
        let rg = self.rg(logits);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::CrossEntropy(logits, probs, labels.to_vec()),
            rg,
        ))
    }

    /// Face kernel correlation. `angles` is `[kernels * points, 2]` holding
    /// `(theta, phi)` of every kernel point on the unit sphere. Output is
    /// `[faces, kernels]`:
    /// `out[i][k] = 1/(4m) * sum_{n in {n_i} + neighbours} sum_j exp(-|n - p_kj|^2 / (2 sigma^2))`.
    pub fn kernel_correlation(
        &mut self,
        angles: Var,
        input: Arc<KernelCorrelationInput>,
    ) -> TensorResult<Var> {
        let t = self.value(angles);
        let (km, two) = t.dims2();
        let (kn, m) = (input.kernels, input.points_per_kernel);
        if two != 2 || km != kn * m {
            return Err(TensorError::ShapeMismatch {
                op: "kernel_correlation",
                left: t.shape().to_vec(),
                right: vec![kn * m, 2],
            });
        }
        if !(input.sigma > 0.0) {
            return Err(TensorError::Invalid(format!(
                "kernel bandwidth must be positive, got {}",
                input.sigma
            )));
        }
        let points = kernel_points(t.data());
        let nf = input.normals.len();
        let inv2s2 = 1.0 / (2.0 * input.sigma * input.sigma);
        // per-face responses, summed over neighbours afterwards
        let mut resp = vec![0.0; nf * kn * m];
        for (f, n) in input.normals.iter().enumerate() {
            for (q, p) in points.iter().enumerate() {
                let d = [n[0] - p[0], n[1] - p[1], n[2] - p[2]];
                resp[f * kn * m + q] = (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * inv2s2).exp();
            }
        }
        let mut per_face = vec![0.0; nf * kn];
        for f in 0..nf {
            for k in 0..kn {
                per_face[f * kn + k] = resp[f * kn * m + k * m..f * kn * m + (k + 1) * m].iter().sum();
            }
        }
        let norm = 1.0 / (4.0 * m as f64);
        let mut out = vec![0.0; nf * kn];
        for (i, nb) in input.neighbors.iter().enumerate() {
            for k in 0..kn {
                let s = per_face[i * kn + k]
                    + per_face[nb[0] * kn + k]
                    + per_face[nb[1] * kn + k]
                    + per_face[nb[2] * kn + k];
                out[i * kn + k] = s * norm;
            }
        }
        let rg = self.rg(angles);
        Ok(self.push(
            Tensor::new(vec![nf, kn], out)?,
            Op::KernelCorrelation(angles, input, resp),
            rg,
        ))
    }

    /// Reverse sweep from a single-element output.
    pub fn backward(&self, output: Var) -> TensorResult<Gradients> {
        let out = &self.nodes[output.0].value;
        if out.len() != 1 {
            return Err(TensorError::NotScalar(out.shape().to_vec()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(vec![1.0]);
        for i in (0..=output.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let val = |v: Var| &self.nodes[v.0].value;
        let wants = |v: Var| self.nodes[v.0].requires_grad;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (n, k) = val(*a).dims2();
                let m = val(*b).cols();
                if wants(*a) {
                    let ga = acc(&mut grads[a.0], n * k);
                    matmul_bt_acc(g, val(*b).data(), n, k, m, ga);
                }
                if wants(*b) {
                    let gb = acc(&mut grads[b.0], k * m);
                    matmul_at_acc(val(*a).data(), g, n, k, m, gb);
                }
            }
            Op::AddBias(x, b) => {
                if wants(*x) {
                    let gx = acc(&mut grads[x.0], g.len());
                    gx.iter_mut().zip(g).for_each(|(o, v)| *o += v);
                }
                if wants(*b) {
                    let m = val(*b).len();
                    let gb = acc(&mut grads[b.0], m);
                    for row in g.chunks(m) {
                        gb.iter_mut().zip(row).for_each(|(o, v)| *o += v);
                    }
                }
            }
            Op::Add(a, b) | Op::Sub(a, b) => {
                let sign = if matches!(node.op, Op::Sub(..)) { -1.0 } else { 1.0 };
                if wants(*a) {
                    let ga = acc(&mut grads[a.0], g.len());
                    ga.iter_mut().zip(g).for_each(|(o, v)| *o += v);
                }
                if wants(*b) {
                    let gb = acc(&mut grads[b.0], g.len());
                    gb.iter_mut().zip(g).for_each(|(o, v)| *o += sign * v);
                }
            }
            Op::Mul(a, b) => {
                if wants(*a) {
                    let bv = val(*b).data();
                    let ga = acc(&mut grads[a.0], g.len());
                    for ((o, gv), y) in ga.iter_mut().zip(g).zip(bv) {
                        *o += gv * y;
                    }
                }
                if wants(*b) {
                    let av = val(*a).data();
                    let gb = acc(&mut grads[b.0], g.len());
                    for ((o, gv), x) in gb.iter_mut().zip(g).zip(av) {
                        *o += gv * x;
                    }
                }
            }
            Op::Scale(a, c) => {
                let ga = acc(&mut grads[a.0], g.len());
                ga.iter_mut().zip(g).for_each(|(o, v)| *o += c * v);
            }
            Op::Abs(a) => {
                let av = val(*a).data();
                let ga = acc(&mut grads[a.0], g.len());
                for ((o, gv), x) in ga.iter_mut().zip(g).zip(av) {
                    if *x > 0.0 {
                        *o += gv;
                    } else if *x < 0.0 {
                        *o -= gv;
                    }
                }
            }
            Op::Relu(a) => {
                let av = val(*a).data();
                let ga = acc(&mut grads[a.0], g.len());
                for ((o, gv), x) in ga.iter_mut().zip(g).zip(av) {
                    if *x > 0.0 {
                        *o += gv;
                    }
                }
            }
            Op::Concat(parts) => {
                let n = node.value.rows();
                let total = node.value.cols();
                let mut offset = 0;
                for p in parts {
                    let w = val(*p).cols();
                    if wants(*p) {
                        let gp = acc(&mut grads[p.0], n * w);
                        for i in 0..n {
                            let src = &g[i * total + offset..i * total + offset + w];
                            gp[i * w..(i + 1) * w]
                                .iter_mut()
                                .zip(src)
                                .for_each(|(o, v)| *o += v);
                        }
                    }
                    offset += w;
                }
            }
            Op::Reshape(a) => {
                let ga = acc(&mut grads[a.0], g.len());
                ga.iter_mut().zip(g).for_each(|(o, v)| *o += v);
            }
            Op::Gather(x, index) => {
                let (n, f) = val(*x).dims2();
                let gx = acc(&mut grads[x.0], n * f);
                for (r, &i) in index.iter().enumerate() {
                    if i == PAD {
                        continue;
                    }
                    gx[i * f..(i + 1) * f]
                        .iter_mut()
                        .zip(&g[r * f..(r + 1) * f])
                        .for_each(|(o, v)| *o += v);
                }
            }
            Op::SpMM(s, x) => {
                let (n, f) = val(*x).dims2();
                let gx = acc(&mut grads[x.0], n * f);
                s.transpose_mul_acc(g, f, gx);
            }
            Op::MeanRows(x) => {
                let (n, f) = val(*x).dims2();
                let inv = 1.0 / n.max(1) as f64;
                let gx = acc(&mut grads[x.0], n * f);
                for i in 0..n {
                    for c in 0..f {
                        gx[i * f + c] += g[c] * inv;
                    }
                }
            }
            Op::MaxRows(x, arg) => {
                let (n, f) = val(*x).dims2();
                let gx = acc(&mut grads[x.0], n * f);
                for (c, &r) in arg.iter().enumerate() {
                    gx[r * f + c] += g[c];
                }
            }
            Op::MaxOf(parts, choice) => {
                for (k, p) in parts.iter().enumerate() {
                    if !wants(*p) {
                        continue;
                    }
                    let gp = acc(&mut grads[p.0], g.len());
                    for (i, &ch) in choice.iter().enumerate() {
                        if ch as usize == k {
                            gp[i] += g[i];
                        }
                    }
                }
            }
            Op::Sum(x) => {
                let len = val(*x).len();
                let gx = acc(&mut grads[x.0], len);
                gx.iter_mut().for_each(|o| *o += g[0]);
            }
            Op::CrossEntropy(logits, probs, labels) => {
                let (b, c) = val(*logits).dims2();
                let scale = g[0] / b as f64;
                let gl = acc(&mut grads[logits.0], b * c);
                for (i, &y) in labels.iter().enumerate() {
                    for j in 0..c {
                        let onehot = if j == y { 1.0 } else { 0.0 };
                        gl[i * c + j] += scale * (probs[i * c + j] - onehot);
                    }
                }
            }
            Op::KernelCorrelation(angles, input, resp) => {
                let ang = val(*angles).data();
                let (kn, m) = (input.kernels, input.points_per_kernel);
                let nf = input.normals.len();
                let norm = 1.0 / (4.0 * m as f64);
                // gradient w.r.t. each face's summed response
                let mut gface = vec![0.0; nf * kn];
                for (i, nb) in input.neighbors.iter().enumerate() {
                    for k in 0..kn {
                        let v = g[i * kn + k] * norm;
                        gface[i * kn + k] += v;
                        for &j in nb {
                            gface[j * kn + k] += v;
                        }
                    }
                }
                let points = kernel_points(ang);
                let inv_s2 = 1.0 / (input.sigma * input.sigma);
                let mut gp = vec![[0.0f64; 3]; kn * m];
                for (f, n) in input.normals.iter().enumerate() {
                    for (q, p) in points.iter().enumerate() {
                        let w = gface[f * kn + q / m] * resp[f * kn * m + q] * inv_s2;
                        if w == 0.0 {
                            continue;
                        }
                        for d in 0..3 {
                            gp[q][d] += w * (n[d] - p[d]);
                        }
                    }
                }
                let ga = acc(&mut grads[angles.0], kn * m * 2);
                for q in 0..kn * m {
                    let (th, ph) = (ang[2 * q], ang[2 * q + 1]);
                    let dth = [th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin()];
                    let dph = [-th.sin() * ph.sin(), th.sin() * ph.cos(), 0.0];
                    ga[2 * q] += gp[q][0] * dth[0] + gp[q][1] * dth[1] + gp[q][2] * dth[2];
                    ga[2 * q + 1] += gp[q][0] * dph[0] + gp[q][1] * dph[1];
                }
            }
        }
    }

    /// Collects gradients of every bound parameter.
    pub fn param_grads(&self, grads: &Gradients) -> GradBuffer {
        let mut buf = GradBuffer::empty(self.param_nodes.len());
        for (pid, node) in self.param_nodes.iter().enumerate() {
            if let Some(v) = node {
                if let Some(g) = grads.wrt(*v) {
                    buf.add(ParamId(pid), g);
                }
            }
        }
        buf
    }
}

/// Unit vectors from `(theta, phi)` pairs.
pub fn kernel_points(angles: &[f64]) -> Vec<Point3> {
    angles
        .chunks(2)
        .map(|a| {
            let (th, ph) = (a[0], a[1]);
            [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
        })
        .collect()
}
