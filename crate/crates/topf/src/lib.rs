//! Topological point features for point clouds.
//!
//! The pipeline turns a point cloud into an `|X| x |F|` feature matrix: it
//! computes persistent homology with representative cycles over the
//! three-element field on an alpha or Vietoris–Rips filtration, selects the
//! significant classes by a drop-off heuristic, projects each representative
//! to the harmonic space of an interpolated snapshot complex, and aggregates
//! the normalized result onto the points. A benchmark harness clusters the
//! synthetic suite with k-means on the features and scores agreement against
//! ground truth.

pub mod bench;
pub mod complex;
pub mod error;
pub mod f3;
pub mod features;
pub mod harmonic;
pub mod persistence;
pub mod pointcloud;
pub mod selection;
pub mod solver;
pub mod tcbs;

pub use complex::{
    build_alpha_filtration, build_vr_filtration, delaunay, BoundaryMatrix, FilteredComplex,
    Simplex, SnapshotComplex, DEFAULT_SIMPLEX_BUDGET,
};
pub use error::{Result, TopfError};
pub use f3::F3;
pub use features::{topf, FeatureMatrix, TopfConfig};
pub use pointcloud::{
    add_gaussian_noise, add_outliers, load_point_cloud, parse_point_cloud, save_point_cloud,
    InputFormat, PointCloud,
};
pub use tcbs::{generate_benchmark, BenchmarkDataset, BenchmarkSpec};
