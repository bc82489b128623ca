//! The five classifiers and their shared plumbing.
//!
//! Template-based models (CoME, SpiralNet++) take their Laplacians, spiral
//! tables and pooling maps from a [`TemplateCache`] built once from the
//! template; per-sample work is limited to feature arithmetic.

mod config;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{
    apply_overrides, ComeConfig, MeshCnnConfig, MeshNetConfig, ModelKind, PointNetConfig, RunConfig, SpiralNetConfig,
    DEFAULT_SEED,
};

use crate::autodiff::checkpoint;
use crate::autodiff::{Graph, Linear, Mlp, ParamSet, Tensor, TensorError, Var};
use crate::decimation::{build_hierarchy, DecimateError, PoolHierarchy};
use crate::edge_net::{self, EdgeConv, EdgeMesh, EdgeNetError};
use crate::face_net::{self, FaceData, FaceRotateConv, KernelCorrelation, MeshConv};
use crate::mesh::{MeshError, TriMesh};
use crate::spectral::{self, ChebConv, LaplacianError, ScaledLaplacian};
use crate::spiral::{self, SpiralConv, SpiralTable};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Template(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    EdgeNet(#[from] EdgeNetError),
    #[error(transparent)]
    Decimate(#[from] DecimateError),
    #[error(transparent)]
    Laplacian(#[from] LaplacianError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Topology structures shared by every sample of a template-based model.
#[derive(Debug)]
pub struct TemplateCache {
    pub hierarchy: PoolHierarchy,
    pub laplacians: Vec<ScaledLaplacian>,
    pub spirals: Vec<SpiralTable>,
    structures_built: usize,
    hits: AtomicUsize,
}

impl TemplateCache {
    /// Builds Laplacians (`order > 0`) and/or spiral tables (`spiral_length >
    /// 0`) for every level that is convolved.
    pub fn build(hierarchy: PoolHierarchy, conv_levels: usize, order: usize, spiral_length: usize) -> Result<Self, ModelError> {
        if hierarchy.levels.len() < conv_levels {
            return Err(ModelError::Template(format!(
                "hierarchy has {} levels, {} needed",
                hierarchy.levels.len(),
                conv_levels
            )));
        }
        let mut laplacians = Vec::new();
        let mut spirals = Vec::new();
        for level in &hierarchy.levels[..conv_levels] {
            if order > 0 {
                laplacians.push(spectral::mesh_laplacian(level)?);
            }
            if spiral_length > 0 {
                spirals.push(spiral::build_spirals(level, spiral_length)?);
            }
        }
        let structures_built = laplacians.len() + spirals.len() + hierarchy.down_maps.len();
        Ok(Self {
            hierarchy,
            laplacians,
            spirals,
            structures_built,
            hits: AtomicUsize::new(0),
        })
    }

    /// Assembles a cache from prebuilt structures. Laplacians and spiral
    /// tables, when present, must cover the leading levels in order.
    pub fn from_parts(
        hierarchy: PoolHierarchy,
        laplacians: Vec<ScaledLaplacian>,
        spirals: Vec<SpiralTable>,
    ) -> Result<Self, ModelError> {
        for (l, lap) in laplacians.iter().enumerate() {
            let n = hierarchy.levels.get(l).map(TriMesh::vertex_count);
            if n != Some(lap.matrix.rows()) {
                return Err(ModelError::Template(format!("Laplacian {l} does not match level {l}")));
            }
        }
        for (l, sp) in spirals.iter().enumerate() {
            let n = hierarchy.levels.get(l).map(TriMesh::vertex_count);
            if n != Some(sp.vertex_count()) {
                return Err(ModelError::Template(format!("spiral table {l} does not match level {l}")));
            }
        }
        let structures_built = laplacians.len() + spirals.len() + hierarchy.down_maps.len();
        Ok(Self {
            hierarchy,
            laplacians,
            spirals,
            structures_built,
            hits: AtomicUsize::new(0),
        })
    }

    pub fn template(&self) -> &TriMesh {
        &self.hierarchy.levels[0]
    }

    /// Number of topology structures this cache ever built.
    pub fn structures_built(&self) -> usize {
        self.structures_built
    }

    /// Number of forward passes served from the cache.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }
}

/// Per-sample inputs, computed once per mesh.
#[derive(Clone, Debug)]
pub enum Input {
    Vertices(Tensor),
    Edges { features: Tensor, mesh: EdgeMesh },
    Faces { data: Arc<FaceData>, centers: Tensor, corners: Tensor, normals: Tensor },
}

#[derive(Clone, Debug)]
struct ComeNet {
    convs: Vec<ChebConv>,
    head: Linear,
}

#[derive(Clone, Debug)]
struct SpiralNet {
    convs: Vec<SpiralConv>,
    head: Linear,
}

#[derive(Clone, Debug)]
struct MeshCnn {
    convs: Vec<EdgeConv>,
    targets: Vec<usize>,
    head: Mlp,
}

#[derive(Clone, Debug)]
struct MeshNet {
    spatial: Mlp,
    rotate: FaceRotateConv,
    kernel: KernelCorrelation,
    convs: Vec<MeshConv>,
    fuse: Linear,
    head: Mlp,
}

#[derive(Clone, Debug)]
struct PointNet {
    point: Mlp,
    head: Mlp,
}

#[derive(Clone, Debug)]
enum Net {
    Come(ComeNet),
    Spiral(SpiralNet),
    MeshCnn(MeshCnn),
    MeshNet(MeshNet),
    PointNet(PointNet),
}

/// A classifier with its parameters and fixed buffers.
#[derive(Debug)]
pub struct Model {
    pub config: RunConfig,
    pub params: ParamSet,
    net: Net,
    cache: Option<Arc<TemplateCache>>,
    /// Per-channel input mean and standard deviation (edge model only).
    normalization: Option<(Vec<f64>, Vec<f64>)>,
}

fn pool_hierarchy(template: &TriMesh, factors: &[f64]) -> Result<PoolHierarchy, ModelError> {
    Ok(build_hierarchy(template, factors)?)
}

impl Model {
    /// Builds a model. `template` must be given exactly for the
    /// template-based models.
    pub fn new(config: &RunConfig, template: Option<&TriMesh>) -> Result<Self, ModelError> {
        let hierarchy = match (config.model.uses_template(), template) {
            (true, Some(t)) => {
                let factors = match config.model {
                    ModelKind::Come => &config.come.pool_factors,
                    _ => &config.spiralnet.pool_factors,
                };
                Some(pool_hierarchy(t, factors)?)
            }
            (true, None) => {
                return Err(ModelError::Template(format!("{} needs a template mesh", config.model)));
            }
            (false, Some(_)) => {
                return Err(ModelError::Template(format!("{} does not use a template mesh", config.model)));
            }
            (false, None) => None,
        };
        Self::with_hierarchy(config, hierarchy)
    }

    /// Builds a model from a precomputed pooling hierarchy.
    pub fn with_hierarchy(config: &RunConfig, hierarchy: Option<PoolHierarchy>) -> Result<Self, ModelError> {
        config.validate().map_err(ModelError::Config)?;
        let cache = match hierarchy {
            Some(h) => {
                let (factors, order, length) = match config.model {
                    ModelKind::Come => (&config.come.pool_factors, config.come.order, 0),
                    ModelKind::SpiralNet => (&config.spiralnet.pool_factors, 0, config.spiralnet.length),
                    _ => {
                        return Err(ModelError::Template(format!("{} does not use a template hierarchy", config.model)));
                    }
                };
                check_factors(&h, factors)?;
                Some(Arc::new(TemplateCache::build(h, factors.len(), order, length)?))
            }
            None => None,
        };
        Self::with_cache(config, cache)
    }

    /// Builds a model around an existing template cache, which may be shared
    /// with other models.
    pub fn with_cache(config: &RunConfig, cache: Option<Arc<TemplateCache>>) -> Result<Self, ModelError> {
        config.validate().map_err(ModelError::Config)?;
        if config.model.uses_template() != cache.is_some() {
            return Err(ModelError::Template(format!(
                "{} {} a template hierarchy",
                config.model,
                if config.model.uses_template() { "needs" } else { "does not use" }
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = ParamSet::new();
        let net = match config.model {
            ModelKind::Come => {
                let c = &config.come;
                let steps = c.widths.len() - 1;
                let t = cache.as_ref().expect("checked");
                if t.laplacians.len() < steps || t.hierarchy.down_maps.len() < steps {
                    return Err(ModelError::Template(format!("template cache covers fewer than {steps} levels")));
                }
                let convs = (0..steps)
                    .map(|l| ChebConv::new(&mut params, &format!("cheb{l}"), c.order, c.widths[l], c.widths[l + 1], &mut rng))
                    .collect();
                let head = Linear::new(&mut params, "head", c.widths[steps], 2, &mut rng);
                Net::Come(ComeNet { convs, head })
            }
            ModelKind::SpiralNet => {
                let c = &config.spiralnet;
                let steps = c.widths.len() - 1;
                let t = cache.as_ref().expect("checked");
                if t.spirals.len() < steps || t.hierarchy.down_maps.len() < steps {
                    return Err(ModelError::Template(format!("template cache covers fewer than {steps} levels")));
                }
                if t.spirals.iter().any(|sp| sp.length() != c.length) {
                    return Err(ModelError::Template("spiral length differs from the config".into()));
                }
                let convs = (0..steps)
                    .map(|l| {
                        SpiralConv::new(&mut params, &format!("spiral{l}"), c.length, c.widths[l], c.widths[l + 1], &mut rng)
                    })
                    .collect();
                let head = Linear::new(&mut params, "head", c.widths[steps], 2, &mut rng);
                Net::Spiral(SpiralNet { convs, head })
            }
            ModelKind::MeshCnn => {
                let c = &config.meshcnn;
                let convs = (0..c.widths.len() - 1)
                    .map(|l| EdgeConv::new(&mut params, &format!("edgeconv{l}"), c.widths[l], c.widths[l + 1], &mut rng))
                    .collect();
                let head = Mlp::new(&mut params, "head", &c.head, &mut rng);
                Net::MeshCnn(MeshCnn {
                    convs,
                    targets: c.pool_targets.clone(),
                    head,
                })
            }
            ModelKind::MeshNet => {
                let c = &config.meshnet;
                let spatial = Mlp::new(&mut params, "spatial", &c.spatial, &mut rng);
                let rotate = FaceRotateConv::new(&mut params, "rotate", &c.rotate_inner, &c.rotate_outer, &mut rng);
                let kernel = KernelCorrelation::new(&mut params, "kernel", c.kernels, c.points_per_kernel, c.sigma, &mut rng);
                let mut s_width = *c.spatial.last().expect("validated");
                let mut t_width = *c.rotate_outer.last().expect("validated") + c.kernels + 3;
                let mut convs = Vec::new();
                for (l, (&cw, &aw)) in c.combination.iter().zip(&c.aggregation).enumerate() {
                    convs.push(MeshConv::new(
                        &mut params,
                        &format!("meshconv{l}"),
                        &[s_width + t_width, cw],
                        &[2 * t_width, aw],
                        &mut rng,
                    ));
                    s_width = cw;
                    t_width = aw;
                }
                let fuse = Linear::new(&mut params, "fuse", s_width + t_width, c.fuse, &mut rng);
                let head = Mlp::new(&mut params, "head", &c.head, &mut rng);
                Net::MeshNet(MeshNet {
                    spatial,
                    rotate,
                    kernel,
                    convs,
                    fuse,
                    head,
                })
            }
            ModelKind::PointNet => {
                let c = &config.pointnet;
                let point = Mlp::new(&mut params, "point", &c.point, &mut rng);
                let head = Mlp::new(&mut params, "head", &c.head, &mut rng);
                Net::PointNet(PointNet { point, head })
            }
        };
        Ok(Self {
            config: config.clone(),
            params,
            net,
            cache,
            normalization: None,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.config.model
    }

    pub fn parameter_count(&self) -> usize {
        self.params.numel()
    }

    pub fn template_cache(&self) -> Option<&Arc<TemplateCache>> {
        self.cache.as_ref()
    }

    /// Converts a mesh into this model's input representation.
    pub fn prepare(&self, mesh: &TriMesh) -> Result<Input, ModelError> {
        if let Some(cache) = &self.cache {
            let t = cache.template();
            if mesh.vertex_count() != t.vertex_count() || mesh.faces() != t.faces() {
                return Err(ModelError::Template(format!(
                    "{} needs samples sharing the template topology ({} vertices, {} faces); got {} vertices, {} faces",
                    self.kind(),
                    t.vertex_count(),
                    t.face_count(),
                    mesh.vertex_count(),
                    mesh.face_count()
                )));
            }
        }
        Ok(match self.kind() {
            ModelKind::Come | ModelKind::SpiralNet | ModelKind::PointNet => Input::Vertices(Tensor::from_rows(mesh.vertices())),
            ModelKind::MeshCnn => Input::Edges {
                features: edge_net::edge_input_features(mesh)?,
                mesh: EdgeMesh::new(mesh)?,
            },
            ModelKind::MeshNet => {
                let data = face_net::face_data(mesh)?;
                Input::Faces {
                    centers: data.centers_tensor(),
                    corners: data.corners_tensor(),
                    normals: Tensor::from_rows(&data.normals),
                    data: Arc::new(data),
                }
            }
        })
    }

    /// Fits the per-channel standardization of edge input features on
    /// training inputs. No-op for other models.
    pub fn fit_normalization(&mut self, inputs: &[Input]) {
        if self.kind() != ModelKind::MeshCnn {
            return;
        }
        let c = edge_net::INPUT_FEATURES;
        let mut sum = vec![0.0; c];
        let mut sq = vec![0.0; c];
        let mut n = 0usize;
        for inp in inputs {
            if let Input::Edges { features, .. } = inp {
                for r in 0..features.rows() {
                    for (k, &v) in features.row(r).iter().enumerate() {
                        sum[k] += v;
                        sq[k] += v * v;
                    }
                }
                n += features.rows();
            }
        }
        if n == 0 {
            return;
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let std: Vec<f64> = sq
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let var = s / n as f64 - m * m;
                if var > 1e-12 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        self.normalization = Some((mean, std));
    }

    pub fn normalization(&self) -> Option<&(Vec<f64>, Vec<f64>)> {
        self.normalization.as_ref()
    }

    fn normalized_edges(&self, features: &Tensor) -> Tensor {
        match &self.normalization {
            None => features.clone(),
            Some((mean, std)) => {
                let c = mean.len();
                let data = features
                    .data()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v - mean[i % c]) / std[i % c])
                    .collect();
                Tensor::new(features.shape().to_vec(), data).expect("shape")
            }
        }
    }

    /// Logits `[1, 2]` for one sample.
    pub fn forward<'p>(&'p self, g: &mut Graph<'p>, input: &Input) -> Result<Var, ModelError> {
        Ok(self.forward_traced(g, input)?.0)
    }

    /// Like [`Model::forward`], also returning the pooled edge structure of
    /// the edge model.
    pub fn forward_traced<'p>(&'p self, g: &mut Graph<'p>, input: &Input) -> Result<(Var, Option<EdgeMesh>), ModelError> {
        let wrong = || ModelError::Template(format!("input kind does not match model {}", self.kind()));
        match (&self.net, input) {
            (Net::Come(net), Input::Vertices(x)) => {
                let cache = self.cache.as_ref().expect("template model");
                cache.hits.fetch_add(1, Ordering::Relaxed);
                let mut h = g.constant(x.clone());
                for (l, conv) in net.convs.iter().enumerate() {
                    let y = conv.forward(g, &cache.laplacians[l], h)?;
                    let y = g.relu(y);
                    h = g.spmm(cache.hierarchy.down_maps[l].clone(), y)?;
                }
                let pooled = g.mean_rows(h);
                Ok((net.head.forward(g, pooled)?, None))
            }
            (Net::Spiral(net), Input::Vertices(x)) => {
                let cache = self.cache.as_ref().expect("template model");
                cache.hits.fetch_add(1, Ordering::Relaxed);
                let mut h = g.constant(x.clone());
                for (l, conv) in net.convs.iter().enumerate() {
                    let y = conv.forward(g, h, &cache.spirals[l])?;
                    let y = g.relu(y);
                    h = g.spmm(cache.hierarchy.down_maps[l].clone(), y)?;
                }
                let pooled = g.mean_rows(h);
                Ok((net.head.forward(g, pooled)?, None))
            }
            (Net::MeshCnn(net), Input::Edges { features, mesh }) => {
                let mut em = mesh.clone();
                let mut h = g.constant(self.normalized_edges(features));
                for (conv, &target) in net.convs.iter().zip(&net.targets) {
                    let y = conv.forward(g, h, em.neighbor_rows())?;
                    let y = g.relu(y);
                    h = edge_net::edge_pool(g, y, &mut em, target)?;
                }
                let pooled = g.mean_rows(h);
                Ok((net.head.forward(g, pooled)?, Some(em)))
            }
            (Net::MeshNet(net), Input::Faces { data, centers, corners, normals }) => {
                let c = g.constant(centers.clone());
                let s = face_net::spatial_descriptor(g, c, &net.spatial)?;
                let mut s = g.relu(s);
                let corners = g.constant(corners.clone());
                let r = net.rotate.forward(g, corners)?;
                let r = g.relu(r);
                let k = net.kernel.forward(g, data)?;
                let n = g.constant(normals.clone());
                let mut t = g.concat_cols(&[r, k, n])?;
                for conv in &net.convs {
                    let (s2, t2) = conv.forward(g, s, t, &data.neighbors)?;
                    s = g.relu(s2);
                    t = g.relu(t2);
                }
                let both = g.concat_cols(&[s, t])?;
                let f = net.fuse.forward(g, both)?;
                let f = g.relu(f);
                let global = g.max_rows(f);
                Ok((net.head.forward(g, global)?, None))
            }
            (Net::PointNet(net), Input::Vertices(x)) => {
                let p = g.constant(x.clone());
                let h = net.point.forward(g, p)?;
                let h = g.relu(h);
                let global = g.max_rows(h);
                Ok((net.head.forward(g, global)?, None))
            }
            _ => Err(wrong()),
        }
    }

    /// Logits as plain numbers.
    pub fn logits(&self, input: &Input) -> Result<[f64; 2], ModelError> {
        let mut g = Graph::with_params(&self.params);
        let out = self.forward(&mut g, input)?;
        let v = g.value(out).data();
        Ok([v[0], v[1]])
    }

    /// Per-original-edge importance after a forward pass (edge model only).
    pub fn edge_importance(&self, input: &Input) -> Result<(EdgeMesh, Vec<f64>), ModelError> {
        let mut g = Graph::with_params(&self.params);
        let (_, em) = self.forward_traced(&mut g, input)?;
        let em = em.ok_or_else(|| ModelError::Template(format!("{} has no edge pooling", self.kind())))?;
        let values = em.importance()?;
        Ok((em, values))
    }

    /// Named tensors: parameters, then fixed buffers prefixed `buffer.`.
    pub fn state(&self) -> Vec<(String, Tensor)> {
        let mut out: Vec<(String, Tensor)> = self.params.iter().map(|p| (p.name.clone(), p.value.clone())).collect();
        if let Some((m, s)) = &self.normalization {
            out.push(("buffer.edge_mean".into(), Tensor::vector(m.clone())));
            out.push(("buffer.edge_std".into(), Tensor::vector(s.clone())));
        }
        out
    }

    pub fn load_state(&mut self, entries: &[(String, Tensor)]) -> Result<(), ModelError> {
        let mut mean = None;
        let mut std = None;
        for (name, t) in entries {
            match name.as_str() {
                "buffer.edge_mean" => mean = Some(t.data().to_vec()),
                "buffer.edge_std" => std = Some(t.data().to_vec()),
                _ => {}
            }
        }
        for p in self.params.iter_mut() {
            let (_, t) = entries
                .iter()
                .find(|(n, _)| *n == p.name)
                .ok_or_else(|| ModelError::Checkpoint(format!("missing tensor {}", p.name)))?;
            if t.shape() != p.value.shape() {
                return Err(ModelError::Checkpoint(format!(
                    "{}: shape {:?} does not match {:?}",
                    p.name,
                    t.shape(),
                    p.value.shape()
                )));
            }
            p.value = t.clone();
        }
        let known = entries
            .iter()
            .filter(|(n, _)| !n.starts_with("buffer.") && self.params.by_name(n).is_none())
            .map(|(n, _)| n.clone())
            .next();
        if let Some(n) = known {
            return Err(ModelError::Checkpoint(format!("unexpected tensor {n}")));
        }
        self.normalization = match (mean, std) {
            (Some(m), Some(s)) => Some((m, s)),
            (None, None) => None,
            _ => return Err(ModelError::Checkpoint("incomplete normalization buffers".into())),
        };
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        checkpoint::write_checkpoint(path, &self.state()).map_err(|e| ModelError::Checkpoint(e.to_string()))
    }

    pub fn load(&mut self, path: &Path) -> Result<(), ModelError> {
        let entries = checkpoint::read_checkpoint(path).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        self.load_state(&entries)
    }
}

fn check_factors(h: &PoolHierarchy, factors: &[f64]) -> Result<(), ModelError> {
    if h.down_maps.len() != factors.len() {
        return Err(ModelError::Template(format!(
            "hierarchy has {} pooling maps, config asks for {}",
            h.down_maps.len(),
            factors.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::icosphere;

    fn model(kind: ModelKind) -> Model {
        let cfg = RunConfig::for_model(kind);
        let t = icosphere(3);
        Model::new(&cfg, kind.uses_template().then_some(&t)).unwrap()
    }

    #[test]
    fn parameter_ordering() {
        let counts: Vec<usize> = [
            ModelKind::Come,
            ModelKind::SpiralNet,
            ModelKind::MeshCnn,
            ModelKind::PointNet,
            ModelKind::MeshNet,
        ]
        .into_iter()
        .map(|k| model(k).parameter_count())
        .collect();
        assert!(counts.windows(2).all(|w| w[0] < w[1]), "{counts:?}");
    }

    #[test]
    fn single_sample_logits() {
        let t = icosphere(3);
        for k in ModelKind::ALL {
            let mut m = model(k);
            let input = m.prepare(&t).unwrap();
            m.fit_normalization(std::slice::from_ref(&input));
            let mut g = Graph::with_params(&m.params);
            let y = m.forward(&mut g, &input).unwrap();
            assert_eq!(g.value(y).shape(), &[1, 2], "{k}");
        }
    }

    #[test]
    fn template_presence_is_checked() {
        let t = icosphere(2);
        assert!(Model::new(&RunConfig::for_model(ModelKind::Come), None).is_err());
        assert!(Model::new(&RunConfig::for_model(ModelKind::PointNet), Some(&t)).is_err());
    }

    #[test]
    fn template_models_reject_foreign_topology() {
        let m = model(ModelKind::SpiralNet);
        let other = crate::decimation::decimate(&icosphere(3), 500).unwrap().mesh;
        assert!(matches!(m.prepare(&other), Err(ModelError::Template(_))));
    }

    #[test]
    fn state_round_trip() {
        let t = icosphere(3);
        let mut a = model(ModelKind::MeshCnn);
        let input = a.prepare(&t).unwrap();
        a.fit_normalization(std::slice::from_ref(&input));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        a.save(&path).unwrap();
        let mut cfg = a.config.clone();
        cfg.seed += 1;
        let mut b = Model::new(&cfg, None).unwrap();
        assert_ne!(a.logits(&input).unwrap(), b.logits(&input).unwrap());
        b.load(&path).unwrap();
        assert_eq!(a.logits(&input).unwrap(), b.logits(&input).unwrap());
    }
}
