//! Synthetic two-class shape dataset on an icosphere template.
//!
//! Every sample is the template pushed radially by a Gaussian bump around its
//! class site (the amplitude sign and size depend on the class) plus a smooth
//! low-order polynomial displacement. Sample `i` draws from its own ChaCha
//! stream, so generation order and thread count do not affect the output.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decimation::{decimate, DecimateError};
use crate::exec::Exec;
use crate::geom::{self, Point3};
use crate::mesh::{self, primitives, MeshError, MeshFormat, TriMesh};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Decimate(#[from] DecimateError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("checksum mismatch for {0}")]
    Checksum(PathBuf),
    #[error("manifest: {0}")]
    Manifest(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    /// Icosphere subdivision level of the template.
    pub template_level: u32,
    pub samples_per_class: [usize; 2],
    /// Bump centre per class; normalized before use.
    pub sites: [Point3; 2],
    pub amplitude_mean: [f64; 2],
    pub amplitude_std: [f64; 2],
    /// Angular standard deviation of the bump, radians.
    pub bump_width: f64,
    /// Scale of the smooth random displacement.
    pub deformation_scale: f64,
    pub rotate: bool,
    /// Decimate each sample to a random ratio in `[0.6, 1.0]`.
    pub vary_topology: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let site = [0.0, 0.0, 1.0];
        Self {
            template_level: 3,
            samples_per_class: [282, 282],
            sites: [site, site],
            amplitude_mean: [-0.2, 0.2],
            amplitude_std: [0.04, 0.04],
            bump_width: 0.35,
            deformation_scale: 0.03,
            rotate: false,
            vary_topology: false,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: &str| Err(DataError::InvalidSpec(m.to_string()));
        if self.samples_per_class.iter().any(|&n| n < 2) {
            return bad("every class needs at least two samples");
        }
        if self.amplitude_mean[0] == self.amplitude_mean[1] && self.sites[0] == self.sites[1] {
            return bad("class amplitude means must differ");
        }
        if self.amplitude_std.iter().any(|s| !(*s >= 0.0)) || !(self.deformation_scale >= 0.0) {
            return bad("standard deviations and scales must be non-negative");
        }
        if !(self.bump_width > 0.0) {
            return bad("bump width must be positive");
        }
        if self.sites.iter().any(|s| geom::normalize(*s).is_none()) {
            return bad("bump sites must be non-zero directions");
        }
        if self.template_level > 5 {
            return bad("template level above 5 is not supported");
        }
        Ok(())
    }

    pub fn template(&self) -> TriMesh {
        primitives::icosphere(self.template_level)
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub mesh: TriMesh,
    pub label: usize,
    pub shares_template: bool,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub spec: SynthSpec,
    pub template: TriMesh,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl Dataset {
    pub fn shares_template(&self) -> bool {
        self.train.iter().chain(&self.test).all(|s| s.shares_template)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Radial displacement basis: degree-1 and degree-2 polynomials on the sphere.
fn smooth_basis(d: Point3) -> [f64; 8] {
    let [x, y, z] = d;
    [x, y, z, x * y, y * z, z * x, x * x - y * y, 3.0 * z * z - 1.0]
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let mut q = [0.0f64; 4];
    loop {
        for v in q.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-9 {
            q.iter_mut().for_each(|v| *v /= n);
            break;
        }
    }
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Deterministic `(label, split)` of sample `i`: labels alternate, and the
/// first half of each class goes to the training split.
pub fn sample_layout(spec: &SynthSpec) -> Vec<(usize, Split)> {
    let mut out = Vec::new();
    let mut seen = [0usize; 2];
    let max = spec.samples_per_class[0].max(spec.samples_per_class[1]);
    for j in 0..max {
        for label in 0..2 {
            if j < spec.samples_per_class[label] {
                let split = if seen[label] < spec.samples_per_class[label] / 2 {
                    Split::Train
                } else {
                    Split::Test
                };
                seen[label] += 1;
                out.push((label, split));
            }
        }
    }
    out
}

/// Builds sample `index` with the given label.
pub fn generate_sample(spec: &SynthSpec, template: &TriMesh, index: usize, label: usize) -> Result<Sample, DataError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let amp = Normal::new(spec.amplitude_mean[label], spec.amplitude_std[label])
        .map_err(|e| DataError::InvalidSpec(e.to_string()))?
        .sample(&mut rng);
    let coeffs: Vec<f64> = (0..8)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * spec.deformation_scale / 8f64.sqrt()
        })
        .collect();
    let site = geom::normalize(spec.sites[label]).expect("validated");
    let two_w2 = 2.0 * spec.bump_width * spec.bump_width;
    let mut verts: Vec<Point3> = template
        .vertices()
        .iter()
        .map(|&p| {
            let d = geom::normalize(p).unwrap_or([0.0, 0.0, 1.0]);
            let ang = geom::angle_between(d, site);
            let basis = smooth_basis(d);
            let smooth: f64 = basis.iter().zip(&coeffs).map(|(b, c)| b * c).sum();
            let r = geom::norm(p) * (1.0 + amp * (-ang * ang / two_w2).exp() + smooth);
            geom::scale(d, r.max(1e-3))
        })
        .collect();
    if spec.rotate {
        let rot = random_rotation(&mut rng);
        for v in verts.iter_mut() {
            *v = [geom::dot(rot[0], *v), geom::dot(rot[1], *v), geom::dot(rot[2], *v)];
        }
    }
    let mut mesh = template.with_vertices(verts);
    let mut shares_template = true;
    if spec.vary_topology {
        let ratio: f64 = rng.gen_range(0.6..=1.0);
        let target = (mesh.vertex_count() as f64 * ratio).floor() as usize;
        if target < mesh.vertex_count() {
            mesh = decimate(&mesh, target.max(4))?.mesh;
            shares_template = false;
        }
    }
    Ok(Sample {
        mesh,
        label,
        shares_template,
    })
}

/// Generates the template and both splits.
pub fn generate(spec: &SynthSpec, exec: Exec) -> Result<Dataset, DataError> {
    spec.validate()?;
    let template = spec.template();
    let layout = sample_layout(spec);
    let samples = exec.map(&layout, |i, &(label, _)| generate_sample(spec, &template, i, label));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (s, &(_, split)) in samples.into_iter().zip(&layout) {
        match split {
            Split::Train => train.push(s?),
            Split::Test => test.push(s?),
        }
    }
    Ok(Dataset {
        spec: spec.clone(),
        template,
        train,
        test,
    })
}

/// Mean vertex radius within one bump width of the class-1 site.
pub fn site_radius(spec: &SynthSpec, mesh: &TriMesh) -> f64 {
    let site = geom::normalize(spec.sites[1]).expect("validated");
    let (mut sum, mut n) = (0.0, 0usize);
    for &p in mesh.vertices() {
        if let Some(d) = geom::normalize(p) {
            if geom::angle_between(d, site) <= spec.bump_width {
                sum += geom::norm(p);
                n += 1;
            }
        }
    }
    if n == 0 {
        1.0
    } else {
        sum / n as f64
    }
}

/// One-feature logistic regression fitted by Newton's method with a small
/// ridge term, which keeps the fit finite on separable data.
#[derive(Clone, Copy, Debug)]
pub struct Logistic {
    pub mean: f64,
    pub scale: f64,
    pub w: f64,
    pub b: f64,
}

impl Logistic {
    pub fn fit(x: &[f64], y: &[usize]) -> Self {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let (mut w, mut b) = (0.0f64, 0.0f64);
        let ridge = 1e-3;
        for _ in 0..50 {
            let (mut gw, mut gb, mut hww, mut hwb, mut hbb) = (ridge * w, 0.0, ridge, 0.0, 1e-9);
            for (&xi, &yi) in x.iter().zip(y) {
                let z = (xi - mean) / scale;
                let p = 1.0 / (1.0 + (-(w * z + b)).exp());
                let r = p - yi as f64;
                gw += r * z / n;
                gb += r / n;
                let s = p * (1.0 - p) / n;
                hww += s * z * z;
                hwb += s * z;
                hbb += s;
            }
            let det = hww * hbb - hwb * hwb;
            if det.abs() < 1e-300 {
                break;
            }
            let dw = (hbb * gw - hwb * gb) / det;
            let db = (hww * gb - hwb * gw) / det;
            w -= dw;
            b -= db;
            if dw.abs() + db.abs() < 1e-12 {
                break;
            }
        }
        Self { mean, scale, w, b }
    }

    pub fn predict(&self, x: f64) -> usize {
        usize::from(self.w * (x - self.mean) / self.scale + self.b > 0.0)
    }
}

/// Test accuracy of a logistic regression on [`site_radius`]: the floor a mesh
/// classifier has to beat.
pub fn separability_check(data: &Dataset) -> f64 {
    let feats = |s: &[Sample]| -> (Vec<f64>, Vec<usize>) {
        s.iter().map(|s| (site_radius(&data.spec, &s.mesh), s.label)).unzip()
    };
    let (xtr, ytr) = feats(&data.train);
    let (xte, yte) = feats(&data.test);
    let model = Logistic::fit(&xtr, &ytr);
    let correct = xte.iter().zip(&yte).filter(|(x, y)| model.predict(**x) == **y).count();
    correct as f64 / xte.len() as f64
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: String,
    pub split: Split,
    pub index: usize,
    pub label: usize,
    pub shares_template: bool,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub spec: SynthSpec,
    pub template: String,
    pub template_sha256: String,
    pub samples: Vec<ManifestEntry>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> DataError {
    DataError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), DataError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Writes `template.off`, `samples/<split>/<idx>_<label>.off` and
/// `manifest.json`.
pub fn save_dataset(data: &Dataset, dir: &Path) -> Result<Manifest, DataError> {
    let template_text = mesh::write_mesh(&data.template, MeshFormat::Off);
    write_file(&dir.join("template.off"), template_text.as_bytes())?;
    let mut samples = Vec::new();
    for (split, list) in [(Split::Train, &data.train), (Split::Test, &data.test)] {
        for (i, s) in list.iter().enumerate() {
            let rel = format!("samples/{}/{:04}_{}.off", split.as_str(), i, s.label);
            let text = mesh::write_mesh(&s.mesh, MeshFormat::Off);
            write_file(&dir.join(&rel), text.as_bytes())?;
            samples.push(ManifestEntry {
                path: rel,
                split,
                index: i,
                label: s.label,
                shares_template: s.shares_template,
                sha256: sha256_hex(text.as_bytes()),
            });
        }
    }
    let manifest = Manifest {
        spec: data.spec.clone(),
        template: "template.off".into(),
        template_sha256: sha256_hex(template_text.as_bytes()),
        samples,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| DataError::Manifest(e.to_string()))?;
    write_file(&dir.join("manifest.json"), json.as_bytes())?;
    Ok(manifest)
}

fn read_checked(path: &Path, sha: &str) -> Result<TriMesh, DataError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if sha256_hex(&bytes) != sha {
        return Err(DataError::Checksum(path.to_path_buf()));
    }
    let text = String::from_utf8(bytes).map_err(|e| io_err(path, e))?;
    Ok(mesh::parse_mesh(&text, MeshFormat::Off)?)
}

/// Loads a dataset directory, verifying every checksum.
pub fn load_dataset(dir: &Path) -> Result<Dataset, DataError> {
    let mpath = dir.join("manifest.json");
    let text = std::fs::read_to_string(&mpath).map_err(|e| io_err(&mpath, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| DataError::Manifest(e.to_string()))?;
    let template = read_checked(&dir.join(&manifest.template), &manifest.template_sha256)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for e in &manifest.samples {
        let mesh = read_checked(&dir.join(&e.path), &e.sha256)?;
        if e.shares_template && mesh.faces() != template.faces() {
            return Err(DataError::Manifest(format!("{} does not share the template faces", e.path)));
        }
        let s = Sample {
            mesh,
            label: e.label,
            shares_template: e.shares_template,
        };
        match e.split {
            Split::Train => train.push(s),
            Split::Test => test.push(s),
        }
    }
    Ok(Dataset {
        spec: manifest.spec,
        template,
        train,
        test,
    })
}
