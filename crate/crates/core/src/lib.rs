//! Mesh-based shape classification: four mesh convolution operator families
//! (Chebyshev spectral, spiral, edge-based, face-based), a point-cloud
//! baseline, quadric-error pooling on a shared template, a small reverse-mode
//! autodiff engine to train them, and a synthetic benchmark harness.

pub mod autodiff;
pub mod bench;
pub mod dataset;
pub mod decimation;
pub mod edge_net;
pub mod exec;
pub mod face_net;
pub mod geom;
pub mod mesh;
pub mod models;
pub mod spectral;
pub mod spiral;

pub use exec::Exec;
pub use mesh::{MeshError, MeshReport, TriMesh};
