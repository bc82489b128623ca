//! Reference meshes used by the dataset generator and the test suites.

use std::collections::HashMap;

use super::TriMesh;
use crate::geom::{self, Point3};

/// Flips faces of a convex, origin-centred polyhedron so that normals point away
/// from the centroid.
fn orient_outward(vertices: &[Point3], faces: &mut [[usize; 3]]) {
    let n = vertices.len() as f64;
    let c = vertices
        .iter()
        .fold([0.0; 3], |acc, v| geom::add(acc, geom::scale(*v, 1.0 / n)));
    for f in faces.iter_mut() {
        let [a, b, d] = f.map(|i| vertices[i]);
        let normal = geom::triangle_normal(a, b, d);
        let centre = geom::scale(geom::add(geom::add(a, b), d), 1.0 / 3.0);
        if geom::dot(normal, geom::sub(centre, c)) < 0.0 {
            f.swap(1, 2);
        }
    }
}

pub fn single_triangle() -> TriMesh {
    TriMesh::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        vec![[0, 1, 2]],
    )
    .expect("valid")
}

/// Unit square split along the (0, 2) diagonal, facing +z.
pub fn flat_quad() -> TriMesh {
    TriMesh::new(
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("valid")
}

pub fn tetrahedron() -> TriMesh {
    let v = vec![
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let mut f = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    orient_outward(&v, &mut f);
    TriMesh::new(v, f).expect("valid")
}

pub fn octahedron() -> TriMesh {
    let v = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let mut f = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    orient_outward(&v, &mut f);
    TriMesh::new(v, f).expect("valid")
}

/// Axis-aligned cube `[0, 1]^3`, two triangles per side.
pub fn cube() -> TriMesh {
    let mut v = Vec::with_capacity(8);
    for i in 0..8 {
        v.push([(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
    }
    let quads = [
        [0, 1, 3, 2],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 3, 7, 6],
        [0, 2, 6, 4],
        [1, 3, 7, 5],
    ];
    let mut f = Vec::new();
    for q in quads {
        f.push([q[0], q[1], q[2]]);
        f.push([q[0], q[2], q[3]]);
    }
    orient_outward(&v, &mut f);
    TriMesh::new(v, f).expect("valid")
}

/// Regular icosahedron inscribed in the unit sphere.
pub fn icosahedron() -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let v: Vec<Point3> = raw
        .iter()
        .map(|p| geom::normalize(*p).expect("non-zero"))
        .collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    TriMesh::new(v, f).expect("valid")
}

/// Icosahedron subdivided `level` times (4-to-1 split), projected onto the unit
/// sphere. Level 3 has 642 vertices and 1280 faces.
pub fn icosphere(level: u32) -> TriMesh {
    let base = icosahedron();
    let mut vertices = base.vertices().to_vec();
    let mut faces = base.faces().to_vec();
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let m = geom::scale(geom::add(vertices[a], vertices[b]), 0.5);
                vertices.push(geom::normalize(m).expect("non-zero midpoint"));
                vertices.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    TriMesh::new(vertices, faces).expect("valid")
}

/// Regular triangulated grid in the `z = 0` plane with `nx * ny` cells, each
/// split along its rising diagonal. Faces point towards +z; interior vertices
/// have degree 6. Vertex `(i, j)` has index `j * (nx + 1) + i`.
pub fn planar_grid(nx: usize, ny: usize) -> TriMesh {
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            v.push([i as f64, j as f64, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut f = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(v, f).expect("valid")
}
