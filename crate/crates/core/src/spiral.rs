//! Spiral sequences on a fixed topology and the spiral convolution.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::autodiff::nn::glorot_uniform;
use crate::autodiff::{Graph, ParamId, ParamSet, Tensor, TensorError, TensorResult, Var, PAD};
use crate::mesh::{MeshResult, TriMesh};

/// Fixed-length spiral per vertex, flattened row-major; [`PAD`] marks
/// missing entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpiralTable {
    length: usize,
    indices: Arc<[usize]>,
}

impl SpiralTable {
    /// Table from a flat `[vertices, length]` index array (`PAD` allowed).
    pub fn from_indices(length: usize, indices: Vec<usize>) -> Result<Self, String> {
        if length == 0 || indices.len() % length != 0 {
            return Err(format!("{} indices do not form rows of {length}", indices.len()));
        }
        let n = indices.len() / length;
        if let Some(&bad) = indices.iter().find(|&&i| i != PAD && i >= n) {
            return Err(format!("index {bad} out of range for {n} vertices"));
        }
        Ok(Self {
            length,
            indices: indices.into(),
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn vertex_count(&self) -> usize {
        self.indices.len() / self.length
    }

    pub fn spiral(&self, v: usize) -> &[usize] {
        &self.indices[v * self.length..(v + 1) * self.length]
    }

    pub fn indices(&self) -> &Arc<[usize]> {
        &self.indices
    }

    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.length as u64).to_le_bytes());
        for &i in self.indices.iter() {
            h.update((i as u64).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// One row of whitespace-separated indices per vertex, `-1` for padding.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in 0..self.vertex_count() {
            let row: Vec<String> = self
                .spiral(v)
                .iter()
                .map(|&i| if i == PAD { "-1".to_string() } else { i.to_string() })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut length = None;
        let mut indices = Vec::new();
        for (ln, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row: Vec<usize> = line
                .split_whitespace()
                .map(|t| match t {
                    "-1" => Ok(PAD),
                    _ => t.parse::<usize>().map_err(|_| format!("line {}: bad index `{t}`", ln + 1)),
                })
                .collect::<Result<_, _>>()?;
            match length {
                None => length = Some(row.len()),
                Some(l) if l != row.len() => return Err(format!("line {}: expected {l} entries", ln + 1)),
                _ => {}
            }
            indices.extend(row);
        }
        let length = length.filter(|&l| l > 0).ok_or("empty spiral table")?;
        Ok(Self {
            length,
            indices: indices.into(),
        })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_text(&text)
    }
}

/// Spiral of `length` entries around every vertex.
///
/// The first ring is the counter-clockwise one-ring starting at the smallest
/// neighbour index (boundary vertices follow their open fan). Each later ring
/// walks the previous ring in order and, around each of its vertices, continues
/// counter-clockwise from the last already visited neighbour.
pub fn build_spirals(mesh: &TriMesh, length: usize) -> MeshResult<SpiralTable> {
    assert!(length >= 1, "spiral length must be positive");
    let vf = mesh.vertex_faces();
    let rings: Vec<Vec<usize>> = (0..mesh.vertex_count())
        .map(|v| mesh.ordered_one_ring(v, &vf))
        .collect::<MeshResult<_>>()?;
    let n = mesh.vertex_count();
    let mut indices = Vec::with_capacity(n * length);
    let mut visited = vec![false; n];
    for v in 0..n {
        let mut seq = vec![v];
        visited[v] = true;
        let mut frontier = Vec::new();
        for &w in &rings[v] {
            if seq.len() >= length {
                break;
            }
            visited[w] = true;
            seq.push(w);
            frontier.push(w);
        }
        while seq.len() < length && !frontier.is_empty() {
            let mut next = Vec::new();
            for &r in &frontier {
                let ring = &rings[r];
                let k = ring.len();
                let start = (0..k)
                    .find(|&i| visited[ring[i]] && !visited[ring[(i + 1) % k]])
                    .map_or(0, |i| (i + 1) % k);
                for j in 0..k {
                    let w = ring[(start + j) % k];
                    if !visited[w] {
                        visited[w] = true;
                        next.push(w);
                    }
                }
            }
            seq.extend(next.iter().copied().take(length - seq.len()));
            frontier = next;
        }
        for &w in &seq {
            visited[w] = false;
        }
        for &w in &frontier {
            visited[w] = false;
        }
        seq.resize(length, PAD);
        indices.extend(seq);
    }
    Ok(SpiralTable {
        length,
        indices: indices.into(),
    })
}

/// `[N, F] -> [N, length * F]`, padding rows contribute zeros.
pub fn spiral_gather(g: &mut Graph, x: Var, table: &SpiralTable) -> TensorResult<Var> {
    let (n, f) = g.value(x).dims2();
    if n != table.vertex_count() {
        return Err(TensorError::ShapeMismatch {
            op: "spiral_gather",
            left: vec![n, f],
            right: vec![table.vertex_count(), table.length()],
        });
    }
    let gathered = g.gather_rows(x, table.indices().clone())?;
    g.reshape(gathered, vec![n, table.length() * f])
}

/// Gathered spiral features followed by one linear layer.
#[derive(Clone, Debug)]
pub struct SpiralConv {
    pub weight: ParamId,
    pub bias: ParamId,
    pub length: usize,
    pub in_features: usize,
    pub out_features: usize,
}

impl SpiralConv {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamSet,
        name: &str,
        length: usize,
        in_features: usize,
        out_features: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = length * in_features;
        let weight = params.add(
            format!("{name}.weight"),
            glorot_uniform(rng, &[fan_in, out_features], fan_in, out_features),
        );
        let bias = params.add(format!("{name}.bias"), Tensor::zeros(&[out_features]));
        Self {
            weight,
            bias,
            length,
            in_features,
            out_features,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.length * self.in_features * self.out_features + self.out_features
    }

    pub fn forward(&self, g: &mut Graph, x: Var, table: &SpiralTable) -> TensorResult<Var> {
        if table.length() != self.length {
            return Err(TensorError::Invalid(format!(
                "spiral table length {} does not match layer length {}",
                table.length(),
                self.length
            )));
        }
        let s = spiral_gather(g, x, table)?;
        let w = g.param(self.weight);
        let y = g.matmul(s, w)?;
        let b = g.param(self.bias);
        g.add_bias(y, b)
    }
}
