//! Triangle meshes: storage, derived edge/adjacency structure, validation and
//! edge-face topology.

mod io;
pub mod primitives;

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::geom::{self, Point3};

pub use io::{
    load_mesh, parse_mesh, save_mesh, write_edge_attributes, write_mesh, MeshFormat,
};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face with {arity} vertices (only triangles are accepted)")]
    NonTriangular { line: usize, arity: usize },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex")]
    RepeatedVertex { face: usize },
    #[error("edge ({0}, {1}) borders {2} faces")]
    NonManifoldEdge(usize, usize, usize),
    #[error("vertex {0} has a non-manifold neighbourhood")]
    NonManifoldVertex(usize),
    #[error("face {0} has zero area")]
    DegenerateFace(usize),
}

pub type MeshResult<T> = Result<T, MeshError>;

/// An indexed triangle mesh with derived edges and vertex adjacency.
///
/// Immutable after construction. Edges are stored as sorted `(min, max)` pairs in
/// lexicographic order, so the edge list does not depend on face order.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    adjacency: Vec<Vec<usize>>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> MeshResult<Self> {
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx >= n {
                    return Err(MeshError::IndexOutOfRange {
                        face: fi,
                        index: idx,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::RepeatedVertex { face: fi });
            }
        }
        let mut edges: Vec<[usize; 2]> = faces
            .iter()
            .flat_map(|f| {
                [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]
                    .map(|(a, b)| [a.min(b), a.max(b)])
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &[a, b] in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            vertices,
            faces,
            edges,
            adjacency,
        })
    }

    /// Same connectivity, new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Point3>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len(), "vertex count changed");
        Self {
            vertices,
            faces: self.faces.clone(),
            edges: self.edges.clone(),
            adjacency: self.adjacency.clone(),
        }
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted neighbour list of every vertex.
    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Dense boolean adjacency matrix. Only sensible for small meshes.
    pub fn adjacency_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.vertex_count();
        let mut m = vec![vec![false; n]; n];
        for &[a, b] in &self.edges {
            m[a][b] = true;
            m[b][a] = true;
        }
        m
    }

    /// Index of the edge `{a, b}` in [`TriMesh::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.binary_search(&key).ok()
    }

    /// Unit normal of face `f`, following its winding.
    pub fn face_normal(&self, f: usize) -> Option<Point3> {
        let [a, b, c] = self.faces[f];
        geom::normalize(geom::triangle_normal(
            self.vertices[a],
            self.vertices[b],
            self.vertices[c],
        ))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        geom::triangle_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Returns the first face whose area is negligible relative to its edge lengths.
    pub fn find_degenerate_face(&self) -> Option<usize> {
        (0..self.faces.len()).find(|&f| self.is_face_degenerate(f))
    }

    pub fn is_face_degenerate(&self, f: usize) -> bool {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        let longest = [geom::sub(b, a), geom::sub(c, b), geom::sub(a, c)]
            .iter()
            .map(|e| geom::dot(*e, *e))
            .fold(0.0, f64::max);
        let twice_area = geom::norm(geom::triangle_normal(a, b, c));
        !(twice_area > 1e-12 * longest) || longest == 0.0
    }

    /// For every edge, the faces that contain it (in face order).
    pub fn edge_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                let e = self
                    .edge_index(f[k], f[(k + 1) % 3])
                    .expect("face edge present in edge list");
                out[e].push(fi);
            }
        }
        out
    }

    /// Vertex-to-incident-face lists.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                out[v].push(fi);
            }
        }
        out
    }

    /// Ordered one-ring of `v` following face winding (counter-clockwise for
    /// outward-facing faces). Interior vertices give a cycle; boundary vertices
    /// give the fan from its open start. Errors if the faces around `v` do not
    /// form a single fan.
    pub fn ordered_one_ring(&self, v: usize, vertex_faces: &[Vec<usize>]) -> MeshResult<Vec<usize>> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for &fi in &vertex_faces[v] {
            let f = self.faces[fi];
            let k = f.iter().position(|&x| x == v).expect("face contains vertex");
            let a = f[(k + 1) % 3];
            let b = f[(k + 2) % 3];
            if next.insert(a, b).is_some() {
                return Err(MeshError::NonManifoldVertex(v));
            }
        }
        if next.is_empty() {
            return Ok(Vec::new());
        }
        let targets: std::collections::HashSet<usize> = next.values().copied().collect();
        let mut starts: Vec<usize> = next
            .keys()
            .copied()
            .filter(|k| !targets.contains(k))
            .collect();
        starts.sort_unstable();
        let start = match starts.len() {
            0 => *next.keys().min().expect("non-empty"),
            1 => starts[0],
            _ => return Err(MeshError::NonManifoldVertex(v)),
        };
        let mut ring = vec![start];
        let mut cur = start;
        while let Some(&n) = next.get(&cur) {
            if n == start {
                break;
            }
            ring.push(n);
            cur = n;
            if ring.len() > next.len() + 1 {
                return Err(MeshError::NonManifoldVertex(v));
            }
        }
        if ring.len() != self.adjacency[v].len() {
            return Err(MeshError::NonManifoldVertex(v));
        }
        Ok(ring)
    }

    /// Re-orients faces so that every pair of faces sharing an edge traverses it
    /// in opposite directions. The first face of each connected component keeps
    /// its winding. Not applied by any loader.
    pub fn fix_winding(&self) -> MeshResult<TriMesh> {
        let edge_faces = self.edge_faces();
        for (e, fs) in edge_faces.iter().enumerate() {
            if fs.len() > 2 {
                let [a, b] = self.edges[e];
                return Err(MeshError::NonManifoldEdge(a, b, fs.len()));
            }
        }
        let mut faces = self.faces.clone();
        let mut visited = vec![false; faces.len()];
        for seed in 0..faces.len() {
            if visited[seed] {
                continue;
            }
            visited[seed] = true;
            let mut queue = VecDeque::from([seed]);
            while let Some(fi) = queue.pop_front() {
                let f = faces[fi];
                for k in 0..3 {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    let e = self.edge_index(a, b).expect("edge exists");
                    for &g in &edge_faces[e] {
                        if g == fi || visited[g] {
                            continue;
                        }
                        let h = faces[g];
                        let same_dir = (0..3).any(|j| h[j] == a && h[(j + 1) % 3] == b);
                        if same_dir {
                            faces[g] = [h[0], h[2], h[1]];
                        }
                        visited[g] = true;
                        queue.push_back(g);
                    }
                }
            }
        }
        TriMesh::new(self.vertices.clone(), faces)
    }
}

/// Summary of manifoldness and connectivity properties.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct MeshReport {
    pub is_edge_manifold: bool,
    pub is_closed: bool,
    pub boundary_edge_count: usize,
    pub connected_components: usize,
}

pub fn validate(mesh: &TriMesh) -> MeshReport {
    let edge_faces = mesh.edge_faces();
    let is_edge_manifold = edge_faces.iter().all(|f| f.len() <= 2);
    let boundary_edge_count = edge_faces.iter().filter(|f| f.len() == 1).count();
    let is_closed = !mesh.faces.is_empty() && edge_faces.iter().all(|f| f.len() == 2);

    let n = mesh.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &[a, b] in &mesh.edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let connected_components = (0..n).filter(|&v| find(&mut parent, v) == v).count();

    MeshReport {
        is_edge_manifold,
        is_closed,
        boundary_edge_count,
        connected_components,
    }
}

/// Faces and neighbour edges of one edge.
///
/// `faces[0]` is the first face (in face order) containing the edge. Within each
/// face the two other edges are listed following the face winding, starting
/// after the shared edge: `neighbors = [a, b, c, d]` with `(a, b)` from face 0
/// and `(c, d)` from face 1. Boundary edges have `None` in the second pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeTopology {
    pub faces: [Option<usize>; 2],
    pub neighbors: [Option<usize>; 4],
}

impl EdgeTopology {
    pub fn is_boundary(&self) -> bool {
        self.faces[1].is_none()
    }
}

pub fn edge_face_topology(mesh: &TriMesh) -> MeshResult<Vec<EdgeTopology>> {
    let edge_faces = mesh.edge_faces();
    let mut out = Vec::with_capacity(mesh.edge_count());
    for (e, fs) in edge_faces.iter().enumerate() {
        if fs.len() > 2 {
            let [a, b] = mesh.edges[e];
            return Err(MeshError::NonManifoldEdge(a, b, fs.len()));
        }
        let [u, v] = mesh.edges[e];
        let mut topo = EdgeTopology {
            faces: [None, None],
            neighbors: [None; 4],
        };
        for (slot, &fi) in fs.iter().enumerate() {
            let f = mesh.faces[fi];
            let k = (0..3)
                .find(|&k| {
                    let (p, q) = (f[k], f[(k + 1) % 3]);
                    (p == u && q == v) || (p == v && q == u)
                })
                .expect("face contains edge");
            let q = f[(k + 1) % 3];
            let r = f[(k + 2) % 3];
            let p = f[k];
            topo.faces[slot] = Some(fi);
            topo.neighbors[2 * slot] = mesh.edge_index(q, r);
            topo.neighbors[2 * slot + 1] = mesh.edge_index(r, p);
        }
        out.push(topo);
    }
    Ok(out)
}
