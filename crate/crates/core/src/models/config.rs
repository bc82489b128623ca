use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::autodiff::AdamConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Come,
    SpiralNet,
    MeshCnn,
    MeshNet,
    PointNet,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Come,
        ModelKind::SpiralNet,
        ModelKind::MeshCnn,
        ModelKind::MeshNet,
        ModelKind::PointNet,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Come => "come",
            ModelKind::SpiralNet => "spiralnet",
            ModelKind::MeshCnn => "meshcnn",
            ModelKind::MeshNet => "meshnet",
            ModelKind::PointNet => "pointnet",
        }
    }

    /// Display name used in reports.
    pub fn method_name(self) -> &'static str {
        match self {
            ModelKind::Come => "CoME",
            ModelKind::SpiralNet => "SpiralNet++",
            ModelKind::MeshCnn => "MeshCNN",
            ModelKind::MeshNet => "MeshNet",
            ModelKind::PointNet => "PointNet",
        }
    }

    /// Whether the model needs every sample to share the template topology.
    pub fn uses_template(self) -> bool {
        matches!(self, ModelKind::Come | ModelKind::SpiralNet)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.id() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown model `{s}` (expected one of come, spiralnet, meshcnn, meshnet, pointnet)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComeConfig {
    /// Chebyshev order K.
    pub order: usize,
    /// Vertex feature widths, input first; one convolution per step.
    pub widths: Vec<usize>,
    /// One template pooling after every convolution.
    pub pool_factors: Vec<f64>,
}

impl Default for ComeConfig {
    fn default() -> Self {
        Self {
            order: 6,
            widths: vec![3, 16, 16, 16, 16],
            pool_factors: vec![0.5; 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpiralNetConfig {
    /// Spiral length.
    pub length: usize,
    pub widths: Vec<usize>,
    pub pool_factors: Vec<f64>,
}

impl Default for SpiralNetConfig {
    fn default() -> Self {
        Self {
            length: 9,
            widths: vec![3, 8, 8, 16, 32],
            pool_factors: vec![0.5; 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshCnnConfig {
    /// Edge feature widths, starting with the 5 input features.
    pub widths: Vec<usize>,
    /// Edge count after each pooling layer; one pooling per convolution.
    pub pool_targets: Vec<usize>,
    /// Classifier MLP, first width equal to the last edge width.
    pub head: Vec<usize>,
}

impl Default for MeshCnnConfig {
    fn default() -> Self {
        Self {
            widths: vec![5, 16, 32, 32],
            pool_targets: vec![1200, 900, 600],
            head: vec![32, 64, 2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshNetConfig {
    /// Spatial descriptor MLP over face centers.
    pub spatial: Vec<usize>,
    /// Pair function of the rotate convolution (input 6).
    pub rotate_inner: Vec<usize>,
    pub rotate_outer: Vec<usize>,
    pub kernels: usize,
    pub points_per_kernel: usize,
    pub sigma: f64,
    /// Output widths of the combination MLP in each mesh convolution.
    pub combination: Vec<usize>,
    /// Output widths of the aggregation MLP in each mesh convolution.
    pub aggregation: Vec<usize>,
    /// Per-face width before the global max.
    pub fuse: usize,
    pub head: Vec<usize>,
}

impl Default for MeshNetConfig {
    fn default() -> Self {
        Self {
            spatial: vec![3, 16],
            rotate_inner: vec![6, 8],
            rotate_outer: vec![8, 8],
            kernels: 4,
            points_per_kernel: 4,
            sigma: 0.2,
            combination: vec![32, 32],
            aggregation: vec![16, 16],
            fuse: 64,
            head: vec![64, 512, 2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointNetConfig {
    pub point: Vec<usize>,
    pub head: Vec<usize>,
}

impl Default for PointNetConfig {
    fn default() -> Self {
        Self {
            point: vec![3, 32, 64],
            head: vec![64, 256, 2],
        }
    }
}

/// Everything needed to build, train and re-evaluate one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelKind,
    pub seed: u64,
    pub dataset: Option<PathBuf>,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    pub come: ComeConfig,
    pub spiralnet: SpiralNetConfig,
    pub meshcnn: MeshCnnConfig,
    pub meshnet: MeshNetConfig,
    pub pointnet: PointNetConfig,
    /// Where each default that the method descriptions leave open came from.
    pub assumptions: BTreeMap<String, String>,
}

pub const DEFAULT_SEED: u64 = 7;

fn assumption_notes() -> BTreeMap<String, String> {
    let note = "assumed default";
    [
        ("come.order", "assumed default; K = 6 follows common Chebyshev mesh autoencoders"),
        ("come.widths", note),
        ("come.pool_factors", "assumed default; 0.5 per level keeps four levels above 4 vertices"),
        ("spiralnet.length", "assumed default; 9 covers the one-ring plus part of the second ring"),
        ("spiralnet.widths", note),
        ("spiralnet.pool_factors", note),
        ("meshcnn.widths", note),
        ("meshcnn.pool_targets", note),
        ("meshcnn.head", note),
        ("meshnet.sigma", "assumed default; fixed bandwidth 0.2"),
        ("meshnet.kernels", note),
        ("meshnet.spatial", note),
        ("meshnet.combination", note),
        ("meshnet.aggregation", note),
        ("meshnet.head", note),
        ("pointnet.point", note),
        ("pointnet.head", note),
        ("epochs", note),
        ("batch_size", note),
        ("optimizer", note),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Applies `key.path=value` overrides to a JSON object. Values parse as JSON
/// and fall back to plain strings. Keys must already exist, except directly
/// under one of the `open` maps.
pub fn apply_overrides(v: &mut Value, overrides: &[(String, String)], open: &[&str]) -> Result<(), String> {
    for (key, raw) in overrides {
        let parsed: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        let parts: Vec<&str> = key.split('.').collect();
        let mut cur = &mut *v;
        for (i, p) in parts.iter().enumerate() {
            let obj = cur
                .as_object_mut()
                .ok_or_else(|| format!("override `{key}`: `{p}` is not inside an object"))?;
            if !obj.contains_key(*p) && !(i == 1 && open.contains(&parts[0])) {
                return Err(format!("unknown config key `{key}`"));
            }
            if i + 1 == parts.len() {
                obj.insert(p.to_string(), parsed.clone());
                break;
            }
            cur = obj.get_mut(*p).expect("checked");
        }
    }
    Ok(())
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_model(ModelKind::SpiralNet)
    }
}

impl RunConfig {
    /// Defaults tuned per model for the synthetic benchmark.
    pub fn for_model(model: ModelKind) -> Self {
        let (epochs, lr) = match model {
            ModelKind::Come => (30, 3e-3),
            ModelKind::SpiralNet => (30, 3e-3),
            ModelKind::MeshCnn => (10, 2e-3),
            ModelKind::MeshNet => (10, 1e-3),
            ModelKind::PointNet => (30, 1e-3),
        };
        Self {
            model,
            seed: DEFAULT_SEED,
            dataset: None,
            epochs,
            batch_size: 16,
            optimizer: AdamConfig {
                lr,
                ..AdamConfig::default()
            },
            come: ComeConfig::default(),
            spiralnet: SpiralNetConfig::default(),
            meshcnn: MeshCnnConfig::default(),
            meshnet: MeshNetConfig::default(),
            pointnet: PointNetConfig::default(),
            assumptions: assumption_notes(),
        }
    }

    /// Overlays a partial JSON object onto the model defaults. Unknown keys
    /// are rejected.
    pub fn from_partial(model: ModelKind, partial: &Value) -> Result<Self, String> {
        let mut base = serde_json::to_value(Self::for_model(model)).map_err(|e| e.to_string())?;
        merge(&mut base, partial);
        base["model"] = Value::String(model.id().into());
        serde_json::from_value(base).map_err(|e| e.to_string())
    }

    /// Applies `key.path=value` overrides; values parse as JSON and fall back
    /// to plain strings.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self, String> {
        let mut v = serde_json::to_value(self).map_err(|e| e.to_string())?;
        apply_overrides(&mut v, overrides, &["assumptions"])?;
        serde_json::from_value(v).map_err(|e| e.to_string())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.batch_size == 0 {
            return Err("batch_size must be positive".into());
        }
        if !(self.optimizer.lr > 0.0) {
            return Err("optimizer.lr must be positive".into());
        }
        let widths_ok = |name: &str, w: &[usize], first: usize| -> Result<(), String> {
            if w.len() < 2 || w[0] != first || w.contains(&0) {
                return Err(format!("{name} must start with {first} and have positive widths"));
            }
            Ok(())
        };
        match self.model {
            ModelKind::Come => {
                let c = &self.come;
                widths_ok("come.widths", &c.widths, 3)?;
                if c.order == 0 {
                    return Err("come.order must be positive".into());
                }
                if c.pool_factors.len() != c.widths.len() - 1 {
                    return Err("come.pool_factors needs one factor per convolution".into());
                }
            }
            ModelKind::SpiralNet => {
                let c = &self.spiralnet;
                widths_ok("spiralnet.widths", &c.widths, 3)?;
                if c.length == 0 {
                    return Err("spiralnet.length must be positive".into());
                }
                if c.pool_factors.len() != c.widths.len() - 1 {
                    return Err("spiralnet.pool_factors needs one factor per convolution".into());
                }
            }
            ModelKind::MeshCnn => {
                let c = &self.meshcnn;
                widths_ok("meshcnn.widths", &c.widths, 5)?;
                if c.pool_targets.len() != c.widths.len() - 1 {
                    return Err("meshcnn.pool_targets needs one target per convolution".into());
                }
                widths_ok("meshcnn.head", &c.head, *c.widths.last().expect("non-empty"))?;
                if c.head.last() != Some(&2) {
                    return Err("meshcnn.head must end with 2 classes".into());
                }
            }
            ModelKind::MeshNet => {
                let c = &self.meshnet;
                widths_ok("meshnet.spatial", &c.spatial, 3)?;
                widths_ok("meshnet.rotate_inner", &c.rotate_inner, 6)?;
                widths_ok("meshnet.rotate_outer", &c.rotate_outer, *c.rotate_inner.last().expect("non-empty"))?;
                if c.combination.len() != c.aggregation.len() || c.combination.is_empty() {
                    return Err("meshnet.combination and meshnet.aggregation need equal, non-zero lengths".into());
                }
                if !(c.sigma > 0.0) || c.kernels == 0 || c.points_per_kernel == 0 {
                    return Err("meshnet kernel settings must be positive".into());
                }
                widths_ok("meshnet.head", &c.head, c.fuse)?;
                if c.head.last() != Some(&2) {
                    return Err("meshnet.head must end with 2 classes".into());
                }
            }
            ModelKind::PointNet => {
                let c = &self.pointnet;
                widths_ok("pointnet.point", &c.point, 3)?;
                widths_ok("pointnet.head", &c.head, *c.point.last().expect("non-empty"))?;
                if c.head.last() != Some(&2) {
                    return Err("pointnet.head must end with 2 classes".into());
                }
            }
        }
        Ok(())
    }
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for k in ModelKind::ALL {
            RunConfig::for_model(k).validate().unwrap();
            assert_eq!(k.id().parse::<ModelKind>().unwrap(), k);
        }
    }

    #[test]
    fn partial_overlay_and_unknown_keys() {
        let cfg = RunConfig::from_partial(ModelKind::Come, &serde_json::json!({"come": {"order": 3}, "epochs": 2})).unwrap();
        assert_eq!(cfg.come.order, 3);
        assert_eq!(cfg.epochs, 2);
        assert_eq!(cfg.come.widths, ComeConfig::default().widths);
        assert!(RunConfig::from_partial(ModelKind::Come, &serde_json::json!({"bogus": 1})).is_err());
        assert!(RunConfig::from_partial(ModelKind::Come, &serde_json::json!({"come": {"bogus": 1}})).is_err());
    }

    #[test]
    fn overrides() {
        let cfg = RunConfig::for_model(ModelKind::MeshNet)
            .with_overrides(&[
                ("meshnet.sigma".into(), "0.5".into()),
                ("optimizer.lr".into(), "0.01".into()),
                ("seed".into(), "11".into()),
            ])
            .unwrap();
        assert_eq!(cfg.meshnet.sigma, 0.5);
        assert_eq!(cfg.optimizer.lr, 0.01);
        assert_eq!(cfg.seed, 11);
        assert!(cfg.with_overrides(&[("nope".into(), "1".into())]).is_err());
        assert!(cfg.with_overrides(&[("seed".into(), "\"x\"".into())]).is_err());
    }

    #[test]
    fn every_default_is_annotated() {
        let cfg = RunConfig::default();
        assert!(cfg.assumptions.contains_key("come.order"));
        assert!(cfg.assumptions.contains_key("spiralnet.length"));
        assert!(cfg.assumptions.values().all(|v| v.contains("assumed default")));
    }
}
