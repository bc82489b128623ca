//! Edge-based mesh network pieces: relative edge features, the symmetric edge
//! convolution and magnitude-ordered edge-collapse pooling.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::autodiff::nn::glorot_uniform;
use crate::autodiff::{Graph, ParamId, ParamSet, SparseMatrix, Tensor, TensorError, Var, PAD};
use crate::geom;
use crate::mesh::{self, MeshError, TriMesh};

#[derive(Debug, Error)]
pub enum EdgeNetError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("edge pooling stopped at {achieved} edges, target was {target}")]
    TargetUnreachable { achieved: usize, target: usize },
    #[error("no pooling step has been recorded")]
    EmptyHistory,
}

pub const INPUT_FEATURES: usize = 5;

/// Per-edge `(dihedral, inner angles sorted, length/height ratios sorted)`.
///
/// The dihedral is `pi - theta` across convex edges and `pi + theta` across
/// concave ones, where `theta` is the angle between the face normals; boundary
/// edges use `pi` and repeat their single face's angle and ratio.
pub fn edge_input_features(m: &TriMesh) -> Result<Tensor, MeshError> {
    if let Some(f) = m.find_degenerate_face() {
        return Err(MeshError::DegenerateFace(f));
    }
    let topo = mesh::edge_face_topology(m)?;
    let pos = m.vertices();
    let mut data = Vec::with_capacity(m.edge_count() * INPUT_FEATURES);
    for (e, t) in topo.iter().enumerate() {
        let [u, v] = m.edges()[e];
        let len2 = {
            let d = geom::sub(pos[u], pos[v]);
            geom::dot(d, d)
        };
        let mut angles = [0.0; 2];
        let mut ratios = [0.0; 2];
        let faces: Vec<usize> = t.faces.iter().flatten().copied().collect();
        for (slot, &f) in faces.iter().enumerate() {
            let w = m.faces()[f].iter().copied().find(|&x| x != u && x != v).expect("triangle");
            angles[slot] = geom::angle_between(geom::sub(pos[u], pos[w]), geom::sub(pos[v], pos[w]));
            ratios[slot] = len2 / (2.0 * m.face_area(f));
        }
        let dihedral = if faces.len() == 2 {
            let n0 = m.face_normal(faces[0]).expect("non-degenerate");
            let n1 = m.face_normal(faces[1]).expect("non-degenerate");
            let theta = geom::angle_between(n0, n1);
            // edge direction as traversed by the first face
            let f0 = m.faces()[faces[0]];
            let k = (0..3)
                .find(|&k| key(f0[k], f0[(k + 1) % 3]) == (u, v))
                .expect("edge in face");
            let (p, q) = (f0[k], f0[(k + 1) % 3]);
            let d = geom::sub(pos[q], pos[p]);
            if geom::dot(geom::cross(n0, n1), d) >= 0.0 {
                PI - theta
            } else {
                PI + theta
            }
        } else {
            angles[1] = angles[0];
            ratios[1] = ratios[0];
            PI
        };
        if angles[0] > angles[1] {
            angles.swap(0, 1);
        }
        if ratios[0] > ratios[1] {
            ratios.swap(0, 1);
        }
        data.extend_from_slice(&[dihedral, angles[0], angles[1], ratios[0], ratios[1]]);
    }
    Ok(Tensor::new(vec![m.edge_count(), INPUT_FEATURES], data).expect("shape"))
}

/// One edge collapse inside a pooling layer.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseRecord {
    pub edge: usize,
    pub magnitude: f64,
    /// `(removed, survivor)` side-edge fusions, one per incident triangle.
    pub fused: [(usize, usize); 2],
}

/// Everything one pooling layer did, in original edge ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PoolRecord {
    pub input_edges: Vec<usize>,
    pub magnitudes: Vec<f64>,
    pub collapses: Vec<CollapseRecord>,
}

/// Mutable edge structure of one sample as it is pooled.
///
/// Edges keep their original ids; the rows of a feature tensor correspond to
/// [`EdgeMesh::live_edges`] in ascending id order.
#[derive(Clone, Debug)]
pub struct EdgeMesh {
    original_edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vertex_faces: Vec<Vec<usize>>,
    live_vertices: usize,
    edge_verts: Vec<[usize; 2]>,
    edge_alive: Vec<bool>,
    lookup: HashMap<(usize, usize), usize>,
    live: Vec<usize>,
    neighbors: Arc<[usize]>,
    history: Vec<PoolRecord>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl EdgeMesh {
    pub fn new(m: &TriMesh) -> Result<Self, MeshError> {
        let report = mesh::validate(m);
        if !report.is_edge_manifold {
            // surface the offending edge
            mesh::edge_face_topology(m)?;
        }
        let lookup = m.edges().iter().enumerate().map(|(i, e)| ((e[0], e[1]), i)).collect();
        let mut em = Self {
            original_edges: m.edges().to_vec(),
            faces: m.faces().to_vec(),
            face_alive: vec![true; m.face_count()],
            vertex_faces: m.vertex_faces(),
            live_vertices: m.vertex_count(),
            edge_verts: m.edges().to_vec(),
            edge_alive: vec![true; m.edge_count()],
            lookup,
            live: (0..m.edge_count()).collect(),
            neighbors: Arc::from(Vec::new()),
            history: Vec::new(),
        };
        em.refresh_neighbors();
        Ok(em)
    }

    pub fn original_edges(&self) -> &[[usize; 2]] {
        &self.original_edges
    }

    pub fn live_edges(&self) -> &[usize] {
        &self.live
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn history(&self) -> &[PoolRecord] {
        &self.history
    }

    /// Flattened `[live, 4]` neighbour rows `(a, b, c, d)`, [`PAD`] where a
    /// boundary edge has no second face.
    pub fn neighbor_rows(&self) -> &Arc<[usize]> {
        &self.neighbors
    }

    pub fn neighbors_of_row(&self, row: usize) -> [usize; 4] {
        let s = &self.neighbors[4 * row..4 * row + 4];
        [s[0], s[1], s[2], s[3]]
    }

    /// Current faces as a mesh over the original vertex positions.
    pub fn current_mesh(&self, vertices: &[geom::Point3]) -> Result<TriMesh, MeshError> {
        let mut index = vec![usize::MAX; vertices.len()];
        let mut verts = Vec::new();
        let mut faces = Vec::new();
        for (f, alive) in self.faces.iter().zip(&self.face_alive) {
            if !alive {
                continue;
            }
            faces.push(f.map(|v| {
                if index[v] == usize::MAX {
                    index[v] = verts.len();
                    verts.push(vertices[v]);
                }
                index[v]
            }));
        }
        TriMesh::new(verts, faces)
    }

    fn refresh_neighbors(&mut self) {
        self.live = (0..self.edge_alive.len()).filter(|&e| self.edge_alive[e]).collect();
        let mut row_of = vec![usize::MAX; self.edge_alive.len()];
        for (r, &e) in self.live.iter().enumerate() {
            row_of[e] = r;
        }
        let mut nb = vec![PAD; 4 * self.live.len()];
        let mut filled = vec![0u8; self.live.len()];
        for (f, alive) in self.faces.iter().zip(&self.face_alive) {
            if !alive {
                continue;
            }
            for k in 0..3 {
                let (p, q, r) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
                let row = row_of[self.lookup[&key(p, q)]];
                let slot = filled[row] as usize;
                debug_assert!(slot < 2, "edge with more than two faces");
                nb[4 * row + 2 * slot] = row_of[self.lookup[&key(q, r)]];
                nb[4 * row + 2 * slot + 1] = row_of[self.lookup[&key(r, p)]];
                filled[row] += 1;
            }
        }
        self.neighbors = nb.into();
    }

    fn vertex_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.vertex_faces[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&x| x != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn edge_faces(&self, u: usize, v: usize) -> Vec<usize> {
        self.vertex_faces[u]
            .iter()
            .copied()
            .filter(|&f| self.faces[f].contains(&v))
            .collect()
    }

    fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_neighbors(v).into_iter().any(|w| self.edge_faces(v, w).len() == 1)
    }

    /// Whether collapsing live edge `e` keeps the mesh edge-manifold.
    pub fn can_collapse(&self, e: usize) -> bool {
        if !self.edge_alive[e] || self.live_vertices <= 4 {
            return false;
        }
        let [u, v] = self.edge_verts[e];
        let faces = self.edge_faces(u, v);
        if faces.len() != 2 {
            return false;
        }
        let opp: Vec<usize> = faces
            .iter()
            .map(|&f| self.faces[f].iter().copied().find(|&x| x != u && x != v).expect("triangle"))
            .collect();
        if opp[0] == opp[1] {
            return false;
        }
        let nu = self.vertex_neighbors(u);
        let common: Vec<usize> = self
            .vertex_neighbors(v)
            .into_iter()
            .filter(|x| nu.binary_search(x).is_ok())
            .collect();
        if common.len() != 2 {
            return false;
        }
        if opp.iter().any(|&w| self.vertex_neighbors(w).len() <= 3) {
            return false;
        }
        !(self.is_boundary_vertex(u) && self.is_boundary_vertex(v))
    }

    /// Collapses `e`, merging its larger endpoint into the smaller one. Of
    /// each pair of fused side edges, the one ranked higher by `rank`
    /// survives, so the outcome does not depend on edge labels. Returns the
    /// two `(removed, survivor)` fusions.
    fn collapse(&mut self, e: usize, rank: impl Fn(usize) -> (f64, usize)) -> [(usize, usize); 2] {
        let [u, v] = self.edge_verts[e];
        let faces = self.edge_faces(u, v);
        let v_neighbors = self.vertex_neighbors(v);
        let mut fused = [(0, 0); 2];
        for (slot, &f) in faces.iter().enumerate() {
            let w = self.faces[f].iter().copied().find(|&x| x != u && x != v).expect("triangle");
            let su = self.lookup[&key(u, w)];
            let sv = self.lookup[&key(v, w)];
            let (ru, rv) = (rank(su), rank(sv));
            let u_wins = ru.0.total_cmp(&rv.0).then(ru.1.cmp(&rv.1)).is_gt();
            let (survivor, removed) = if u_wins { (su, sv) } else { (sv, su) };
            fused[slot] = (removed, survivor);
            self.edge_alive[removed] = false;
            self.lookup.remove(&key(self.edge_verts[removed][0], self.edge_verts[removed][1]));
            self.face_alive[f] = false;
            for x in self.faces[f] {
                self.vertex_faces[x].retain(|&g| g != f);
            }
        }
        self.edge_alive[e] = false;
        self.lookup.remove(&key(u, v));
        // re-key v's remaining edges onto u
        for x in v_neighbors {
            if let Some(id) = self.lookup.remove(&key(v, x)) {
                self.edge_verts[id] = [u.min(x), u.max(x)];
                self.lookup.insert(key(u, x), id);
            }
        }
        let moved = std::mem::take(&mut self.vertex_faces[v]);
        for f in moved {
            for x in self.faces[f].iter_mut() {
                if *x == v {
                    *x = u;
                }
            }
            self.vertex_faces[u].push(f);
        }
        self.vertex_faces[u].sort_unstable();
        self.live_vertices -= 1;
        fused
    }

    /// Collapses edges in ascending `(magnitude, id)` order until at most
    /// `target` edges remain. Returns the `[live_out, live_in]` pooling matrix
    /// whose rows average each surviving edge's merged inputs.
    pub fn pool(&mut self, magnitudes: &[f64], target: usize) -> Result<SparseMatrix, EdgeNetError> {
        let input = self.live.clone();
        assert_eq!(magnitudes.len(), input.len(), "one magnitude per live edge");
        let row_of: HashMap<usize, usize> = input.iter().enumerate().map(|(r, &e)| (e, r)).collect();
        let mut order: Vec<usize> = (0..input.len()).collect();
        order.sort_by(|&a, &b| magnitudes[a].total_cmp(&magnitudes[b]).then(input[a].cmp(&input[b])));
        // per original edge id: weights over input rows
        let mut weights: HashMap<usize, Vec<(usize, f64)>> =
            input.iter().enumerate().map(|(r, &e)| (e, vec![(r, 1.0)])).collect();
        let mut record = PoolRecord {
            input_edges: input.clone(),
            magnitudes: magnitudes.to_vec(),
            collapses: Vec::new(),
        };
        let mut live = input.len();
        for &row in &order {
            if live <= target {
                break;
            }
            let e = input[row];
            if !self.can_collapse(e) {
                continue;
            }
            let fused = self.collapse(e, |id| (magnitudes[row_of[&id]], id));
            let we = weights.remove(&e).expect("live edge");
            for &(removed, survivor) in &fused {
                let wr = weights.remove(&removed).expect("live edge");
                let ws = weights.get_mut(&survivor).expect("live edge");
                let mut merged: HashMap<usize, f64> = HashMap::new();
                for &(c, w) in ws.iter().chain(&wr).chain(&we) {
                    *merged.entry(c).or_insert(0.0) += w / 3.0;
                }
                let mut merged: Vec<(usize, f64)> = merged.into_iter().collect();
                merged.sort_by_key(|&(c, _)| c);
                *ws = merged;
            }
            record.collapses.push(CollapseRecord {
                edge: e,
                magnitude: magnitudes[row],
                fused,
            });
            live -= 3;
        }
        self.refresh_neighbors();
        self.history.push(record);
        if live > target {
            return Err(EdgeNetError::TargetUnreachable { achieved: live, target });
        }
        let mut t = Vec::new();
        for (r, e) in self.live.iter().enumerate() {
            for &(c, w) in &weights[e] {
                t.push((r, c, w));
            }
        }
        Ok(SparseMatrix::from_triplets(self.live.len(), input.len(), &t))
    }

    /// Importance value per original edge.
    ///
    /// A collapsed edge gets its magnitude at the step it was collapsed; an
    /// edge fused away gets the magnitude of the edge it was fused into at
    /// that step; an edge that survives every layer gets its magnitude in the
    /// last layer.
    pub fn importance(&self) -> Result<Vec<f64>, EdgeNetError> {
        let last = self.history.last().ok_or(EdgeNetError::EmptyHistory)?;
        let mut value = vec![f64::NAN; self.original_edges.len()];
        for rec in &self.history {
            let mag: HashMap<usize, f64> = rec.input_edges.iter().copied().zip(rec.magnitudes.iter().copied()).collect();
            for c in &rec.collapses {
                value[c.edge] = c.magnitude;
                for &(removed, survivor) in &c.fused {
                    value[removed] = mag[&survivor];
                }
            }
        }
        for (&e, &m) in last.input_edges.iter().zip(&last.magnitudes) {
            if value[e].is_nan() {
                value[e] = m;
            }
        }
        debug_assert!(value.iter().all(|v| !v.is_nan()));
        Ok(value)
    }

    /// Writes the importance values as an `.edgeattr` file (`v_i v_j value`).
    pub fn export_importance(&self, path: impl AsRef<Path>) -> Result<(), EdgeNetError> {
        let values = self.importance()?;
        let rows: Vec<([usize; 2], f64)> = self.original_edges.iter().copied().zip(values).collect();
        mesh::write_edge_attributes(path, &rows)?;
        Ok(())
    }
}

/// Row-wise L2 norms.
pub fn row_norms(t: &Tensor) -> Vec<f64> {
    (0..t.rows()).map(|r| t.row(r).iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

/// Pools the features held in `x` (rows = live edges of `em`).
pub fn edge_pool(g: &mut Graph, x: Var, em: &mut EdgeMesh, target: usize) -> Result<Var, EdgeNetError> {
    if g.value(x).rows() != em.live_count() {
        return Err(TensorError::ShapeMismatch {
            op: "edge_pool",
            left: g.value(x).shape().to_vec(),
            right: vec![em.live_count()],
        }
        .into());
    }
    if em.live_count() <= target {
        return Ok(x);
    }
    let mags = row_norms(g.value(x));
    let p = em.pool(&mags, target)?;
    Ok(g.spmm(Arc::new(p), x)?)
}

/// `[x, |a - c|, a + c, |b - d|, b + d] W + bias` for every edge.
#[derive(Clone, Debug)]
pub struct EdgeConv {
    pub weight: ParamId,
    pub bias: ParamId,
    pub in_features: usize,
    pub out_features: usize,
}

impl EdgeConv {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamSet,
        name: &str,
        in_features: usize,
        out_features: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = 5 * in_features;
        let weight = params.add(
            format!("{name}.weight"),
            glorot_uniform(rng, &[fan_in, out_features], fan_in, out_features),
        );
        let bias = params.add(format!("{name}.bias"), Tensor::zeros(&[out_features]));
        Self {
            weight,
            bias,
            in_features,
            out_features,
        }
    }

    pub fn parameter_count(&self) -> usize {
        5 * self.in_features * self.out_features + self.out_features
    }

    /// `neighbors` is the flattened `[E, 4]` table from [`EdgeMesh::neighbor_rows`].
    pub fn forward(&self, g: &mut Graph, x: Var, neighbors: &Arc<[usize]>) -> Result<Var, TensorError> {
        let sym = symmetric_features(g, x, neighbors)?;
        let w = g.param(self.weight);
        let y = g.matmul(sym, w)?;
        let b = g.param(self.bias);
        g.add_bias(y, b)
    }
}

/// `[E, F] -> [E, 5F]` order-invariant neighbourhood tuple.
pub fn symmetric_features(g: &mut Graph, x: Var, neighbors: &Arc<[usize]>) -> Result<Var, TensorError> {
    let (e, _) = g.value(x).dims2();
    if neighbors.len() != 4 * e {
        return Err(TensorError::ShapeMismatch {
            op: "edge_conv",
            left: vec![e],
            right: vec![neighbors.len() / 4, 4],
        });
    }
    let pick = |k: usize| -> Arc<[usize]> { (0..e).map(|r| neighbors[4 * r + k]).collect() };
    let a = g.gather_rows(x, pick(0))?;
    let b = g.gather_rows(x, pick(1))?;
    let c = g.gather_rows(x, pick(2))?;
    let d = g.gather_rows(x, pick(3))?;
    let ac = g.sub(a, c)?;
    let ac_abs = g.abs(ac);
    let ac_sum = g.add(a, c)?;
    let bd = g.sub(b, d)?;
    let bd_abs = g.abs(bd);
    let bd_sum = g.add(b, d)?;
    g.concat_cols(&[x, ac_abs, ac_sum, bd_abs, bd_sum])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::{flat_quad, icosahedron, icosphere, octahedron};
    use crate::mesh::validate;

    fn equilateral_pair() -> TriMesh {
        let h = 3f64.sqrt() / 2.0;
        TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0], [0.5, -h, 0.0]],
            vec![[0, 1, 2], [1, 0, 3]],
        )
        .unwrap()
    }

    #[test]
    fn flat_diagonal_is_pi() {
        let q = flat_quad();
        let f = edge_input_features(&q).unwrap();
        let diag = q.edge_index(0, 2).unwrap();
        assert!((f.get(diag, 0) - PI).abs() < 1e-12);
    }

    #[test]
    fn equilateral_values() {
        let m = equilateral_pair();
        let f = edge_input_features(&m).unwrap();
        let e = m.edge_index(0, 1).unwrap();
        let row = f.row(e);
        assert!((row[0] - PI).abs() < 1e-12);
        assert!((row[1] - PI / 3.0).abs() < 1e-12 && (row[2] - PI / 3.0).abs() < 1e-12);
        let r = 2.0 / 3f64.sqrt();
        assert!((row[3] - r).abs() < 1e-12 && (row[4] - r).abs() < 1e-12);
    }

    #[test]
    fn convex_and_concave_dihedrals() {
        let ico = icosahedron();
        let f = edge_input_features(&ico).unwrap();
        for e in 0..ico.edge_count() {
            assert!(f.get(e, 0) < PI && f.get(e, 0) > 0.0);
        }
        // push a vertex inward past its neighbours' plane to create concave edges
        let mut v = ico.vertices().to_vec();
        v[0] = geom::scale(v[0], 0.2);
        let dented = ico.with_vertices(v);
        let f = edge_input_features(&dented).unwrap();
        let e = dented.edge_index(0, dented.neighbors(0)[0]).unwrap();
        assert!(f.get(e, 0) > PI);
    }

    #[test]
    fn scale_invariant() {
        let m = icosphere(1);
        let a = edge_input_features(&m).unwrap();
        let scaled = m.with_vertices(m.vertices().iter().map(|p| geom::scale(*p, 7.3)).collect());
        let b = edge_input_features(&scaled).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn initial_neighbors_match_topology() {
        let m = icosphere(1);
        let em = EdgeMesh::new(&m).unwrap();
        let topo = mesh::edge_face_topology(&m).unwrap();
        for (r, t) in topo.iter().enumerate() {
            let expect = t.neighbors.map(|n| n.unwrap_or(PAD));
            assert_eq!(em.neighbors_of_row(r), expect);
        }
    }

    #[test]
    fn one_collapse_removes_three_edges() {
        let m = icosphere(1);
        let mut em = EdgeMesh::new(&m).unwrap();
        let n = em.live_count();
        let mags: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let p = em.pool(&mags, n - 3).unwrap();
        assert_eq!(em.live_count(), n - 3);
        assert_eq!((p.rows(), p.cols()), (n - 3, n));
        for s in p.row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(em.history()[0].collapses.len(), 1);
        let cur = em.current_mesh(m.vertices()).unwrap();
        let r = validate(&cur);
        assert!(r.is_closed && r.is_edge_manifold);
        for row in 0..em.live_count() {
            assert!(em.neighbors_of_row(row).iter().all(|&x| x != PAD));
        }
    }

    #[test]
    fn pooling_counts_and_manifold() {
        let m = icosphere(3);
        let mut em = EdgeMesh::new(&m).unwrap();
        let mags: Vec<f64> = m.edges().iter().map(|e| ((e[0] * 31 + e[1] * 17) % 97) as f64).collect();
        em.pool(&mags, 1770).unwrap();
        assert_eq!(em.history()[0].collapses.len(), 50);
        assert_eq!(em.live_count(), 1770);
        let cur = em.current_mesh(m.vertices()).unwrap();
        let r = validate(&cur);
        assert!(r.is_closed && r.is_edge_manifold);
        assert_eq!(cur.edge_count(), 1770);
    }

    #[test]
    fn unreachable_target_reports_count() {
        let m = octahedron();
        let mut em = EdgeMesh::new(&m).unwrap();
        let err = em.pool(&[1.0; 12], 0).unwrap_err();
        assert!(matches!(err, EdgeNetError::TargetUnreachable { target: 0, .. }));
    }

    #[test]
    fn importance_needs_history() {
        let em = EdgeMesh::new(&icosahedron()).unwrap();
        assert!(matches!(em.importance(), Err(EdgeNetError::EmptyHistory)));
    }

    #[test]
    fn importance_file_has_one_line_per_edge() {
        let m = icosphere(2);
        let mut em = EdgeMesh::new(&m).unwrap();
        let mags: Vec<f64> = (0..m.edge_count()).map(|i| (i % 13) as f64 * 0.1).collect();
        em.pool(&mags, 300).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.edgeattr");
        em.export_importance(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), m.edge_count());
        assert!(em.importance().unwrap().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn zero_features_give_bias() {
        let m = icosahedron();
        let em = EdgeMesh::new(&m).unwrap();
        let mut ps = ParamSet::new();
        let conv = EdgeConv::new(&mut ps, "e", 2, 3, &mut rand::thread_rng());
        assert_eq!(conv.parameter_count(), ps.numel());
        ps.get_mut(conv.bias).value.data_mut().copy_from_slice(&[0.1, 0.2, 0.3]);
        let mut g = Graph::with_params(&ps);
        let x = g.constant(Tensor::zeros(&[30, 2]));
        let y = conv.forward(&mut g, x, em.neighbor_rows()).unwrap();
        for r in 0..30 {
            assert_eq!(g.value(y).row(r), &[0.1, 0.2, 0.3]);
        }
    }
}
