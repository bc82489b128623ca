//! Quadric-error edge contraction and the template pooling hierarchy.
//!
//! Contractions are restricted to existing edges. The cheapest valid edge is
//! taken from a min-heap with lazy invalidation; ties go to the smaller
//! `(min vertex, max vertex)` pair. Contraction positions are the quadric
//! minimizers, but the emitted coarse mesh places every vertex at the mean of
//! the fine vertices merged into it, so that the down-sampling matrix applied
//! to the fine coordinates reproduces the coarse coordinates.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::autodiff::SparseMatrix;
use crate::geom::{self, Point3};
use crate::mesh::{self, MeshError, MeshFormat, TriMesh};

#[derive(Debug, Error)]
pub enum DecimateError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("face {0} has zero area")]
    DegenerateFace(usize),
    #[error("target vertex count {target} is invalid for a mesh with {vertices} vertices")]
    InvalidTarget { target: usize, vertices: usize },
    #[error("reduction factor {0} is outside (0, 1)")]
    InvalidFactor(f64),
    #[error("no valid contraction left: reached {achieved} vertices, target was {target}")]
    TargetUnreachable { achieved: usize, target: usize },
    #[error("hierarchy cache: {0}")]
    Cache(String),
}

/// Symmetric 4x4 matrix accumulating plane outer products.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadric {
    m: [[f64; 4]; 4],
}

impl Default for Quadric {
    fn default() -> Self {
        Self::zero()
    }
}

impl Quadric {
    pub fn zero() -> Self {
        Self { m: [[0.0; 4]; 4] }
    }

    /// `p p^T` for the plane `ax + by + cz + d = 0`, `a^2 + b^2 + c^2 = 1`.
    pub fn from_plane(p: [f64; 4]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = p[i] * p[j];
            }
        }
        Self { m }
    }

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    /// `[v; 1]^T Q [v; 1]`.
    pub fn error(&self, v: Point3) -> f64 {
        let h = [v[0], v[1], v[2], 1.0];
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += h[i] * self.m[i][j] * h[j];
            }
        }
        s
    }

    /// Position minimizing the error, or `None` when the 3x3 system is
    /// singular relative to its scale.
    pub fn minimizer(&self) -> Option<Point3> {
        let a = [
            [self.m[0][0], self.m[0][1], self.m[0][2]],
            [self.m[1][0], self.m[1][1], self.m[1][2]],
            [self.m[2][0], self.m[2][1], self.m[2][2]],
        ];
        let b = [-self.m[0][3], -self.m[1][3], -self.m[2][3]];
        let det = det3(&a);
        let frob = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        if !(det.abs() >= 1e-10 * frob.powi(3)) || frob == 0.0 {
            return None;
        }
        let mut x = [0.0; 3];
        for (k, xk) in x.iter_mut().enumerate() {
            let mut ak = a;
            for r in 0..3 {
                ak[r][k] = b[r];
            }
            *xk = det3(&ak) / det;
        }
        Some(x)
    }
}

impl std::ops::Add for Quadric {
    type Output = Quadric;

    fn add(mut self, rhs: Quadric) -> Quadric {
        self += rhs;
        self
    }
}

impl std::ops::AddAssign for Quadric {
    fn add_assign(&mut self, rhs: Quadric) {
        for i in 0..4 {
            for j in 0..4 {
                self.m[i][j] += rhs.m[i][j];
            }
        }
    }
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn face_plane(p: [Point3; 3]) -> Option<[f64; 4]> {
    let n = geom::normalize(geom::triangle_normal(p[0], p[1], p[2]))?;
    Some([n[0], n[1], n[2], -geom::dot(n, p[0])])
}

/// Per-vertex sum of the plane quadrics of its incident faces.
pub fn vertex_quadrics(mesh: &TriMesh) -> Result<Vec<Quadric>, DecimateError> {
    let mut q = vec![Quadric::zero(); mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        if mesh.is_face_degenerate(fi) {
            return Err(DecimateError::DegenerateFace(fi));
        }
        let plane = face_plane(f.map(|i| mesh.vertices()[i])).ok_or(DecimateError::DegenerateFace(fi))?;
        let fq = Quadric::from_plane(plane);
        for &v in f {
            q[v] += fq;
        }
    }
    Ok(q)
}

/// Cost and position of contracting two vertices with quadrics `q1`, `q2` and
/// positions `p1`, `p2`. Falls back to the best of the endpoints and the
/// midpoint when the quadric system is singular.
pub fn collapse_cost(q1: &Quadric, q2: &Quadric, p1: Point3, p2: Point3) -> (f64, Point3) {
    let q = *q1 + *q2;
    if let Some(x) = q.minimizer() {
        return (q.error(x), x);
    }
    let mid = geom::scale(geom::add(p1, p2), 0.5);
    let mut best = (q.error(p1), p1);
    for cand in [p2, mid] {
        let e = q.error(cand);
        if e < best.0 {
            best = (e, cand);
        }
    }
    best
}

/// One accepted contraction: `removed` merged into `kept` (`kept < removed`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contraction {
    pub kept: usize,
    pub removed: usize,
    pub cost: f64,
    pub position: Point3,
}

#[derive(Clone, Debug)]
pub struct Decimation {
    pub mesh: TriMesh,
    /// `coarse x fine` averaging matrix; rows sum to one.
    pub down_map: SparseMatrix,
    /// Coarse vertex index of every fine vertex.
    pub assignment: Vec<usize>,
    pub contractions: Vec<Contraction>,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    cost: f64,
    a: usize,
    b: usize,
    stamp_a: u32,
    stamp_b: u32,
    position: Point3,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

/// Working state of an in-progress decimation.
struct Collapser {
    pos: Vec<Point3>,
    quadrics: Vec<Quadric>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vfaces: Vec<Vec<usize>>,
    alive: Vec<bool>,
    parent: Vec<usize>,
    stamp: Vec<u32>,
    live: usize,
}

impl Collapser {
    fn new(mesh: &TriMesh) -> Result<Self, DecimateError> {
        let quadrics = vertex_quadrics(mesh)?;
        let n = mesh.vertex_count();
        Ok(Self {
            pos: mesh.vertices().to_vec(),
            quadrics,
            faces: mesh.faces().to_vec(),
            face_alive: vec![true; mesh.face_count()],
            vfaces: mesh.vertex_faces(),
            alive: vec![true; n],
            parent: (0..n).collect(),
            stamp: vec![0; n],
            live: n,
        })
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.vfaces[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&x| x != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn candidate(&self, a: usize, b: usize) -> Candidate {
        let (a, b) = (a.min(b), a.max(b));
        let (cost, position) = collapse_cost(&self.quadrics[a], &self.quadrics[b], self.pos[a], self.pos[b]);
        Candidate {
            cost,
            a,
            b,
            stamp_a: self.stamp[a],
            stamp_b: self.stamp[b],
            position,
        }
    }

    fn is_boundary_vertex(&self, v: usize) -> bool {
        self.neighbors(v).into_iter().any(|w| self.shared_faces(v, w).len() == 1)
    }

    fn shared_faces(&self, a: usize, b: usize) -> Vec<usize> {
        self.vfaces[a]
            .iter()
            .copied()
            .filter(|&f| self.faces[f].contains(&b))
            .collect()
    }

    /// Link condition, boundary rule and normal-flip test for contracting
    /// `(a, b)` to `p`.
    fn is_valid(&self, a: usize, b: usize, p: Point3) -> bool {
        if !self.alive[a] || !self.alive[b] {
            return false;
        }
        let shared = self.shared_faces(a, b);
        if shared.is_empty() || shared.len() > 2 {
            return false;
        }
        let opposite: HashSet<usize> = shared
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&x| x != a && x != b)
            .collect();
        let na: HashSet<usize> = self.neighbors(a).into_iter().collect();
        let common = self.neighbors(b).into_iter().filter(|x| na.contains(x)).count();
        if common != opposite.len() || opposite.len() != shared.len() {
            return false;
        }
        if shared.len() == 2 && self.is_boundary_vertex(a) && self.is_boundary_vertex(b) {
            return false;
        }
        // closed tetrahedron cannot shrink further
        if self.live <= 4 {
            return false;
        }
        for &v in &[a, b] {
            for &f in &self.vfaces[v] {
                if shared.contains(&f) {
                    continue;
                }
                let old = self.faces[f].map(|i| self.pos[i]);
                let new = self.faces[f].map(|i| if i == a || i == b { p } else { self.pos[i] });
                let n_old = geom::triangle_normal(old[0], old[1], old[2]);
                let n_new = geom::triangle_normal(new[0], new[1], new[2]);
                let longest = (0..3)
                    .map(|k| {
                        let e = geom::sub(new[k], new[(k + 1) % 3]);
                        geom::dot(e, e)
                    })
                    .fold(0.0, f64::max);
                if geom::norm(n_new) <= 1e-12 * longest || geom::dot(n_old, n_new) < 0.0 {
                    return false;
                }
            }
        }
        true
    }

    fn contract(&mut self, a: usize, b: usize, p: Point3) {
        let b_faces = std::mem::take(&mut self.vfaces[b]);
        let mut a_faces: Vec<usize> = self.vfaces[a].clone();
        for f in b_faces {
            if self.faces[f].contains(&a) {
                self.face_alive[f] = false;
                for &x in &self.faces[f] {
                    if x != a && x != b {
                        self.vfaces[x].retain(|&g| g != f);
                    }
                }
                a_faces.retain(|&g| g != f);
            } else {
                for x in self.faces[f].iter_mut() {
                    if *x == b {
                        *x = a;
                    }
                }
                a_faces.push(f);
            }
        }
        a_faces.sort_unstable();
        self.vfaces[a] = a_faces;
        self.pos[a] = p;
        let qb = self.quadrics[b];
        self.quadrics[a] += qb;
        self.alive[b] = false;
        self.parent[b] = a;
        self.stamp[a] += 1;
        self.live -= 1;
    }

    fn root(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }
}

/// Contracts edges of `mesh` until it has `target` vertices.
pub fn decimate(mesh: &TriMesh, target: usize) -> Result<Decimation, DecimateError> {
    let n = mesh.vertex_count();
    if target < 4 || target >= n {
        return Err(DecimateError::InvalidTarget { target, vertices: n });
    }
    let report = mesh::validate(mesh);
    if !report.is_edge_manifold {
        let (a, b, k) = mesh
            .edge_faces()
            .iter()
            .enumerate()
            .find(|(_, f)| f.len() > 2)
            .map(|(e, f)| (mesh.edges()[e][0], mesh.edges()[e][1], f.len()))
            .expect("non-manifold edge exists");
        return Err(MeshError::NonManifoldEdge(a, b, k).into());
    }
    let mut st = Collapser::new(mesh)?;
    let mut heap: BinaryHeap<Reverse<Candidate>> = mesh
        .edges()
        .iter()
        .map(|&[a, b]| Reverse(st.candidate(a, b)))
        .collect();
    let mut contractions = Vec::with_capacity(n - target);

    while st.live > target {
        let Some(Reverse(c)) = heap.pop() else {
            return Err(DecimateError::TargetUnreachable {
                achieved: st.live,
                target,
            });
        };
        if !st.alive[c.a] || !st.alive[c.b] || st.stamp[c.a] != c.stamp_a || st.stamp[c.b] != c.stamp_b {
            continue;
        }
        if !st.is_valid(c.a, c.b, c.position) {
            continue;
        }
        st.contract(c.a, c.b, c.position);
        contractions.push(Contraction {
            kept: c.a,
            removed: c.b,
            cost: c.cost,
            position: c.position,
        });
        // refresh costs around the kept vertex; neighbour edges are re-queued
        // because their validity may have changed
        let ring = st.neighbors(c.a);
        for &w in &ring {
            heap.push(Reverse(st.candidate(c.a, w)));
        }
        for &w in &ring {
            for x in st.neighbors(w) {
                if x != c.a && w < x {
                    heap.push(Reverse(st.candidate(w, x)));
                }
            }
        }
    }

    let mut coarse_index = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if st.alive[v] {
            coarse_index[v] = next;
            next += 1;
        }
    }
    let assignment: Vec<usize> = (0..n).map(|v| coarse_index[st.root(v)]).collect();
    let mut sizes = vec![0usize; next];
    for &c in &assignment {
        sizes[c] += 1;
    }
    let triplets: Vec<(usize, usize, f64)> = assignment
        .iter()
        .enumerate()
        .map(|(f, &c)| (c, f, 1.0 / sizes[c] as f64))
        .collect();
    let down_map = SparseMatrix::from_triplets(next, n, &triplets);
    let coarse_vertices = apply_down_map(&down_map, mesh.vertices());
    let faces: Vec<[usize; 3]> = st
        .faces
        .iter()
        .zip(&st.face_alive)
        .filter(|(_, &alive)| alive)
        .map(|(f, _)| f.map(|v| coarse_index[v]))
        .collect();
    let coarse = TriMesh::new(coarse_vertices, faces)?;
    Ok(Decimation {
        mesh: coarse,
        down_map,
        assignment,
        contractions,
    })
}

/// Applies a `coarse x fine` map to per-vertex positions.
pub fn apply_down_map(d: &SparseMatrix, fine: &[Point3]) -> Vec<Point3> {
    let flat: Vec<f64> = fine.iter().flatten().copied().collect();
    d.mul_dense(&flat, 3)
        .chunks(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect()
}

/// Coarsened template meshes and the averaging maps between consecutive levels.
#[derive(Clone, Debug)]
pub struct PoolHierarchy {
    pub levels: Vec<TriMesh>,
    pub down_maps: Vec<Arc<SparseMatrix>>,
}

impl PoolHierarchy {
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(TriMesh::vertex_count).collect()
    }

    /// Per-level fingerprints of the down-sampling matrices.
    pub fn fingerprint(&self) -> Vec<String> {
        self.down_maps.iter().map(|d| d.fingerprint()).collect()
    }

    /// Writes `level_<k>.off` and `down_<k>.txt` (`coarse fine weight` rows).
    pub fn save(&self, dir: &Path) -> Result<(), DecimateError> {
        std::fs::create_dir_all(dir).map_err(|e| DecimateError::Cache(e.to_string()))?;
        for (k, m) in self.levels.iter().enumerate() {
            mesh::save_mesh(m, dir.join(format!("level_{k}.off")), MeshFormat::Off)?;
        }
        for (k, d) in self.down_maps.iter().enumerate() {
            let mut s = String::new();
            let _ = writeln!(s, "# {} {}", d.rows(), d.cols());
            for (r, c, v) in d.triplets() {
                let _ = writeln!(s, "{r} {c} {v}");
            }
            std::fs::write(dir.join(format!("down_{k}.txt")), s)
                .map_err(|e| DecimateError::Cache(e.to_string()))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, DecimateError> {
        let mut levels = Vec::new();
        while dir.join(format!("level_{}.off", levels.len())).exists() {
            let p = dir.join(format!("level_{}.off", levels.len()));
            levels.push(mesh::load_mesh(p, MeshFormat::Off)?);
        }
        if levels.is_empty() {
            return Err(DecimateError::Cache(format!("no levels in {}", dir.display())));
        }
        let mut down_maps = Vec::new();
        for k in 0..levels.len() - 1 {
            let text = std::fs::read_to_string(dir.join(format!("down_{k}.txt")))
                .map_err(|e| DecimateError::Cache(e.to_string()))?;
            let (rows, cols) = (levels[k + 1].vertex_count(), levels[k].vertex_count());
            let mut t = Vec::new();
            for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
                let tok: Vec<&str> = line.split_whitespace().collect();
                let parse = |s: &str| s.parse::<f64>().map_err(|_| DecimateError::Cache(format!("bad row `{line}`")));
                if tok.len() != 3 {
                    return Err(DecimateError::Cache(format!("bad row `{line}`")));
                }
                t.push((parse(tok[0])? as usize, parse(tok[1])? as usize, parse(tok[2])?));
            }
            down_maps.push(Arc::new(SparseMatrix::from_triplets(rows, cols, &t)));
        }
        Ok(Self { levels, down_maps })
    }
}

/// Repeatedly decimates `template`; level `k + 1` has
/// `floor(factor_k * |level k|)` vertices.
pub fn build_hierarchy(template: &TriMesh, factors: &[f64]) -> Result<PoolHierarchy, DecimateError> {
    let mut levels = vec![template.clone()];
    let mut down_maps = Vec::with_capacity(factors.len());
    for &f in factors {
        if !(f > 0.0 && f < 1.0) {
            return Err(DecimateError::InvalidFactor(f));
        }
        let cur = levels.last().expect("at least the template");
        let target = (cur.vertex_count() as f64 * f).floor() as usize;
        let d = decimate(cur, target)?;
        levels.push(d.mesh);
        down_maps.push(Arc::new(d.down_map));
    }
    Ok(PoolHierarchy { levels, down_maps })
}
