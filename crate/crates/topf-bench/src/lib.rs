//! Shared fixtures for the criterion benchmarks.

use topf::{generate_benchmark, BenchmarkDataset, BenchmarkSpec, PointCloud};

/// A benchmark cloud at a size suitable for repeated timing.
pub fn fixture(dataset: BenchmarkDataset, scale: f64) -> PointCloud {
    generate_benchmark(&BenchmarkSpec::new(dataset, 1).with_scale(scale))
        .expect("benchmark generation")
}
