//! Face-based mesh network pieces: per-face data, spatial and structural
//! descriptors, and the combination/aggregation mesh convolution.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::autodiff::{Graph, KernelCorrelationInput, Mlp, ParamId, ParamSet, Tensor, TensorError, TensorResult, Var};
use crate::geom::{self, Point3};
use crate::mesh::{MeshError, TriMesh};

/// Per-face geometry and face adjacency.
#[derive(Clone, Debug)]
pub struct FaceData {
    pub centers: Vec<Point3>,
    /// Corner offsets `vertex - center` in face order.
    pub corners: Vec<[Point3; 3]>,
    pub normals: Vec<Point3>,
    /// Face across each edge `(v0,v1), (v1,v2), (v2,v0)`; the face itself on
    /// the boundary.
    pub neighbors: Vec<[usize; 3]>,
}

pub fn face_data(mesh: &TriMesh) -> Result<FaceData, MeshError> {
    let ef = mesh.edge_faces();
    let mut out = FaceData {
        centers: Vec::with_capacity(mesh.face_count()),
        corners: Vec::with_capacity(mesh.face_count()),
        normals: Vec::with_capacity(mesh.face_count()),
        neighbors: Vec::with_capacity(mesh.face_count()),
    };
    for (fi, f) in mesh.faces().iter().enumerate() {
        if mesh.is_face_degenerate(fi) {
            return Err(MeshError::DegenerateFace(fi));
        }
        let p = f.map(|v| mesh.vertices()[v]);
        let c = geom::scale(geom::add(geom::add(p[0], p[1]), p[2]), 1.0 / 3.0);
        out.centers.push(c);
        out.corners.push(p.map(|q| geom::sub(q, c)));
        out.normals.push(mesh.face_normal(fi).ok_or(MeshError::DegenerateFace(fi))?);
        let mut nb = [fi; 3];
        for k in 0..3 {
            let e = mesh.edge_index(f[k], f[(k + 1) % 3]).expect("face edge");
            if ef[e].len() > 2 {
                return Err(MeshError::NonManifoldEdge(f[k], f[(k + 1) % 3], ef[e].len()));
            }
            if let Some(&other) = ef[e].iter().find(|&&g| g != fi) {
                nb[k] = other;
            }
        }
        out.neighbors.push(nb);
    }
    Ok(out)
}

impl FaceData {
    pub fn face_count(&self) -> usize {
        self.centers.len()
    }

    pub fn centers_tensor(&self) -> Tensor {
        Tensor::from_rows(&self.centers)
    }

    /// `[F, 9]`: the three corner offsets side by side.
    pub fn corners_tensor(&self) -> Tensor {
        let rows: Vec<Vec<f64>> = self.corners.iter().map(|c| c.iter().flatten().copied().collect()).collect();
        Tensor::from_rows(&rows)
    }

    pub fn kernel_input(&self, kernels: usize, points_per_kernel: usize, sigma: f64) -> Arc<KernelCorrelationInput> {
        Arc::new(KernelCorrelationInput {
            normals: self.normals.clone(),
            neighbors: self.neighbors.clone(),
            kernels,
            points_per_kernel,
            sigma,
        })
    }
}

/// Shared MLP over face centers.
pub fn spatial_descriptor(g: &mut Graph, centers: Var, mlp: &Mlp) -> TensorResult<Var> {
    if g.value(centers).cols() != mlp.in_width() {
        return Err(TensorError::ShapeMismatch {
            op: "spatial_descriptor",
            left: g.value(centers).shape().to_vec(),
            right: vec![mlp.in_width()],
        });
    }
    mlp.forward(g, centers)
}

/// `outer(mean_k relu(inner([OV_k, OV_k+1])))` over the three cyclic pairs.
#[derive(Clone, Debug)]
pub struct FaceRotateConv {
    pub inner: Mlp,
    pub outer: Mlp,
}

fn pair_selector(k: usize) -> Tensor {
    let mut s = Tensor::zeros(&[9, 6]);
    for (slot, corner) in [k, (k + 1) % 3].into_iter().enumerate() {
        for d in 0..3 {
            s.data_mut()[(3 * corner + d) * 6 + 3 * slot + d] = 1.0;
        }
    }
    s
}

impl FaceRotateConv {
    pub fn new<R: Rng + ?Sized>(params: &mut ParamSet, name: &str, inner: &[usize], outer: &[usize], rng: &mut R) -> Self {
        assert_eq!(inner[0], 6, "rotate convolution pairs two 3-vectors");
        assert_eq!(inner.last(), outer.first(), "inner output feeds outer input");
        Self {
            inner: Mlp::new(params, &format!("{name}.inner"), inner, rng),
            outer: Mlp::new(params, &format!("{name}.outer"), outer, rng),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.inner.parameter_count() + self.outer.parameter_count()
    }

    /// `corners` is `[F, 9]` as produced by [`FaceData::corners_tensor`].
    pub fn forward(&self, g: &mut Graph, corners: Var) -> TensorResult<Var> {
        let mut acc = None;
        for k in 0..3 {
            let sel = g.constant(pair_selector(k));
            let pair = g.matmul(corners, sel)?;
            let h = self.inner.forward(g, pair)?;
            let h = g.relu(h);
            acc = Some(match acc {
                None => h,
                Some(a) => g.add(a, h)?,
            });
        }
        let mean = g.scale(acc.expect("three pairs"), 1.0 / 3.0);
        self.outer.forward(g, mean)
    }
}

/// Learnable kernel points on the unit sphere, `(theta, phi)` per point.
#[derive(Clone, Debug)]
pub struct KernelCorrelation {
    pub angles: ParamId,
    pub kernels: usize,
    pub points_per_kernel: usize,
    pub sigma: f64,
}

impl KernelCorrelation {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamSet,
        name: &str,
        kernels: usize,
        points_per_kernel: usize,
        sigma: f64,
        rng: &mut R,
    ) -> Self {
        let n = kernels * points_per_kernel;
        let data = (0..n)
            .flat_map(|_| [rng.gen_range(0.0..=PI), rng.gen_range(0.0..2.0 * PI)])
            .collect();
        let angles = params.add(format!("{name}.angles"), Tensor::new(vec![n, 2], data).expect("shape"));
        Self {
            angles,
            kernels,
            points_per_kernel,
            sigma,
        }
    }

    pub fn parameter_count(&self) -> usize {
        2 * self.kernels * self.points_per_kernel
    }

    pub fn forward(&self, g: &mut Graph, faces: &FaceData) -> TensorResult<Var> {
        let a = g.param(self.angles);
        g.kernel_correlation(a, faces.kernel_input(self.kernels, self.points_per_kernel, self.sigma))
    }
}

/// Combination (spatial with structural) and max-aggregation over the three
/// neighbouring faces.
#[derive(Clone, Debug)]
pub struct MeshConv {
    pub combination: Mlp,
    pub aggregation: Mlp,
}

impl MeshConv {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamSet,
        name: &str,
        combination: &[usize],
        aggregation: &[usize],
        rng: &mut R,
    ) -> Self {
        Self {
            combination: Mlp::new(params, &format!("{name}.combination"), combination, rng),
            aggregation: Mlp::new(params, &format!("{name}.aggregation"), aggregation, rng),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.combination.parameter_count() + self.aggregation.parameter_count()
    }

    pub fn forward(
        &self,
        g: &mut Graph,
        spatial: Var,
        structural: Var,
        neighbors: &[[usize; 3]],
    ) -> TensorResult<(Var, Var)> {
        let both = g.concat_cols(&[spatial, structural])?;
        let spatial_out = self.combination.forward(g, both)?;
        let mut branches = Vec::with_capacity(3);
        for k in 0..3 {
            let idx: Arc<[usize]> = neighbors.iter().map(|n| n[k]).collect();
            let nb = g.gather_rows(structural, idx)?;
            let pair = g.concat_cols(&[structural, nb])?;
            branches.push(self.aggregation.forward(g, pair)?);
        }
        let structural_out = g.max_of(&branches)?;
        Ok((spatial_out, structural_out))
    }
}
