//! Synthetic benchmark clouds for topological clustering.
//!
//! Seven labeled datasets mixing 0-, 1- and 2-dimensional topological
//! structure in ambient 2D and 3D. The generators are parametric
//! reconstructions: shapes, point counts and cluster counts follow the
//! published suite, while the exact radii, centers and jitter levels are
//! fixed constants documented here. Everything is a pure function of
//! (dataset, seed, scale).

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, TopfError};
use crate::pointcloud::PointCloud;

/// The seven benchmark datasets.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BenchmarkDataset {
    FourSpheres,
    Ellipses,
    SpheresGrid,
    HalvedCircle,
    TwoSpheresTwoCircles,
    SphereInCircle,
    Spaceship,
}

impl BenchmarkDataset {
    pub const ALL: [BenchmarkDataset; 7] = [
        BenchmarkDataset::FourSpheres,
        BenchmarkDataset::Ellipses,
        BenchmarkDataset::SpheresGrid,
        BenchmarkDataset::HalvedCircle,
        BenchmarkDataset::TwoSpheresTwoCircles,
        BenchmarkDataset::SphereInCircle,
        BenchmarkDataset::Spaceship,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkDataset::FourSpheres => "4Spheres",
            BenchmarkDataset::Ellipses => "Ellipses",
            BenchmarkDataset::SpheresGrid => "SpheresGrid",
            BenchmarkDataset::HalvedCircle => "HalvedCircle",
            BenchmarkDataset::TwoSpheresTwoCircles => "2Spheres2Circles",
            BenchmarkDataset::SphereInCircle => "SphereInCircle",
            BenchmarkDataset::Spaceship => "Spaceship",
        }
    }

    /// Accepts the canonical name plus common spelling variants,
    /// case-insensitively.
    pub fn parse(name: &str) -> Result<BenchmarkDataset> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "4spheres" | "fourspheres" => Ok(BenchmarkDataset::FourSpheres),
            "ellipses" => Ok(BenchmarkDataset::Ellipses),
            "spheresgrid" | "spheresplusgrid" => Ok(BenchmarkDataset::SpheresGrid),
            "halvedcircle" => Ok(BenchmarkDataset::HalvedCircle),
            "2spheres2circles" | "twospherestwocircles" => {
                Ok(BenchmarkDataset::TwoSpheresTwoCircles)
            }
            "sphereincircle" => Ok(BenchmarkDataset::SphereInCircle),
            "spaceship" => Ok(BenchmarkDataset::Spaceship),
            _ => Err(TopfError::UnknownDataset(name.to_string())),
        }
    }

    /// Number of ground-truth clusters.
    pub fn cluster_count(self) -> usize {
        match self {
            BenchmarkDataset::FourSpheres => 4,
            BenchmarkDataset::Ellipses => 2,
            BenchmarkDataset::SpheresGrid => 3,
            BenchmarkDataset::HalvedCircle => 2,
            BenchmarkDataset::TwoSpheresTwoCircles => 4,
            BenchmarkDataset::SphereInCircle => 2,
            BenchmarkDataset::Spaceship => 4,
        }
    }

    /// Total point count at `scale = 1.0`.
    pub fn point_count(self) -> usize {
        match self {
            BenchmarkDataset::FourSpheres => 656,
            BenchmarkDataset::Ellipses => 158,
            BenchmarkDataset::SpheresGrid => 866,
            BenchmarkDataset::HalvedCircle => 249,
            BenchmarkDataset::TwoSpheresTwoCircles => 4600,
            BenchmarkDataset::SphereInCircle => 267,
            BenchmarkDataset::Spaceship => 650,
        }
    }

    pub fn ambient_dim(self) -> usize {
        match self {
            BenchmarkDataset::FourSpheres
            | BenchmarkDataset::Ellipses
            | BenchmarkDataset::SpheresGrid
            | BenchmarkDataset::HalvedCircle => 2,
            _ => 3,
        }
    }
}

/// Which benchmark cloud to generate, under which seed, at which size.
#[derive(Copy, Clone, Debug)]
pub struct BenchmarkSpec {
    pub name: BenchmarkDataset,
    pub seed: u64,
    /// Multiplies per-cluster point counts; 1.0 reproduces the documented
    /// totals.
    pub scale: f64,
}

impl BenchmarkSpec {
    pub fn new(name: BenchmarkDataset, seed: u64) -> BenchmarkSpec {
        BenchmarkSpec {
            name,
            seed,
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> BenchmarkSpec {
        self.scale = scale;
        self
    }
}

fn scaled(count: usize, scale: f64) -> usize {
    ((count as f64 * scale).round() as usize).max(1)
}

struct Builder {
    points: Vec<Vec<f64>>,
    labels: Vec<i64>,
    rng: ChaCha8Rng,
    scale: f64,
}

impl Builder {
    fn new(spec: &BenchmarkSpec) -> Builder {
        // Mix the dataset tag into the seed so each dataset has its own
        // stream even under a shared master seed.
        let tag = spec.name.name().bytes().fold(0u64, |acc, b| {
            acc.wrapping_mul(0x100000001b3).wrapping_add(b as u64)
        });
        Builder {
            points: Vec::new(),
            labels: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(tag)),
            scale: spec.scale,
        }
    }

    fn push(&mut self, p: Vec<f64>, label: i64) {
        self.points.push(p);
        self.labels.push(label);
    }

    fn jitter(&mut self, p: &mut [f64], sigma: f64) {
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).unwrap();
            for c in p {
                *c += normal.sample(&mut self.rng);
            }
        }
    }

    /// Jitter must stay below the sampling spacing or the shape's homology
    /// drowns in tube-scale noise; cap it at a third of the spacing.
    fn capped(sigma: f64, spacing: f64) -> f64 {
        sigma.min(spacing / 3.0)
    }

    /// Evenly spaced circle (random phase, jittered) in the plane spanned by
    /// `u`, `v` around `center`. Even base spacing keeps the loop's birth at
    /// the sampling scale instead of the largest random gap.
    fn circle(&mut self, count: usize, center: &[f64], u: &[f64], v: &[f64], r: f64, sigma: f64, label: i64) {
        let n = scaled(count, self.scale);
        let sigma = Self::capped(sigma, TAU * r / n as f64);
        let phase = self.rng.gen::<f64>() * TAU;
        for i in 0..n {
            let theta = phase + i as f64 / n as f64 * TAU;
            let (s, c) = theta.sin_cos();
            let mut p: Vec<f64> = center
                .iter()
                .zip(u.iter().zip(v))
                .map(|(&m, (&ui, &vi))| m + r * (c * ui + s * vi))
                .collect();
            self.jitter(&mut p, sigma);
            self.push(p, label);
        }
    }

    fn circle2d(&mut self, count: usize, center: [f64; 2], r: f64, sigma: f64, label: i64) {
        self.circle(count, &center, &[1.0, 0.0], &[0.0, 1.0], r, sigma, label);
    }

    fn arc2d(&mut self, count: usize, center: [f64; 2], r: f64, from: f64, to: f64, sigma: f64, label: i64) {
        let n = scaled(count, self.scale);
        let sigma = Self::capped(sigma, (to - from).abs() * r / n as f64);
        for i in 0..n {
            let theta = from + (i as f64 + 0.5) / n as f64 * (to - from);
            let mut p = vec![center[0] + r * theta.cos(), center[1] + r * theta.sin()];
            self.jitter(&mut p, sigma);
            self.push(p, label);
        }
    }

    fn ellipse2d(&mut self, count: usize, center: [f64; 2], a: f64, b: f64, sigma: f64, label: i64) {
        let n = scaled(count, self.scale);
        let sigma = Self::capped(sigma, TAU * a.min(b) / n as f64);
        let phase = self.rng.gen::<f64>() * TAU;
        for i in 0..n {
            let theta = phase + i as f64 / n as f64 * TAU;
            let mut p = vec![center[0] + a * theta.cos(), center[1] + b * theta.sin()];
            self.jitter(&mut p, sigma);
            self.push(p, label);
        }
    }

    /// Near-uniform sphere sample: Fibonacci lattice with a random rotation
    /// about the z axis, then jitter.
    fn sphere3d(&mut self, count: usize, center: [f64; 3], r: f64, sigma: f64, label: i64) {
        let n = scaled(count, self.scale);
        let spacing = (4.0 * std::f64::consts::PI * r * r / n as f64).sqrt();
        let sigma = Self::capped(sigma, spacing);
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        let phase = self.rng.gen::<f64>() * TAU;
        for i in 0..n {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let theta = phase + i as f64 * TAU / golden;
            let dir = [rho * theta.cos(), rho * theta.sin(), z];
            let mut p: Vec<f64> = center.iter().zip(dir).map(|(&m, d)| m + r * d).collect();
            self.jitter(&mut p, sigma);
            self.push(p, label);
        }
    }

    /// Jittered grid on an axis-aligned rectangle in the z = `z` plane;
    /// `nx * ny` points before scaling.
    fn plate3d(&mut self, nx: usize, ny: usize, x: [f64; 2], y: [f64; 2], z: f64, sigma: f64, label: i64) {
        let s = self.scale.sqrt();
        let (nx, ny) = (scaled(nx, s), scaled(ny, s));
        let dx = (x[1] - x[0]) / (nx.max(2) - 1) as f64;
        let dy = (y[1] - y[0]) / (ny.max(2) - 1) as f64;
        let sigma = Self::capped(sigma, dx.min(dy));
        for ix in 0..nx {
            for iy in 0..ny {
                let mut p = vec![x[0] + ix as f64 * dx, y[0] + iy as f64 * dy, z];
                self.jitter(&mut p, sigma);
                self.push(p, label);
            }
        }
    }

    /// Exact regular grid, no jitter.
    fn grid2d(&mut self, nx: usize, ny: usize, origin: [f64; 2], spacing: f64, label: i64) {
        let (nx, ny) = (scaled(nx, self.scale.sqrt()), scaled(ny, self.scale.sqrt()));
        for ix in 0..nx {
            for iy in 0..ny {
                self.push(
                    vec![origin[0] + ix as f64 * spacing, origin[1] + iy as f64 * spacing],
                    label,
                );
            }
        }
    }

    fn finish(self) -> Result<PointCloud> {
        PointCloud::new(self.points, Some(self.labels))
    }
}

/// Generates a labeled benchmark cloud. Deterministic in the spec.
pub fn generate_benchmark(spec: &BenchmarkSpec) -> Result<PointCloud> {
    if !(spec.scale > 0.0) {
        return Err(TopfError::InvalidParameter(format!(
            "scale must be positive, got {}",
            spec.scale
        )));
    }
    let mut b = Builder::new(spec);
    match spec.name {
        BenchmarkDataset::FourSpheres => {
            // A rough line of circles: no enclosed void between clusters.
            b.circle2d(164, [0.0, 0.0], 1.0, 0.03, 0);
            b.circle2d(213, [3.3, 0.4], 1.3, 0.03, 1);
            b.circle2d(131, [6.8, -0.3], 0.8, 0.03, 2);
            b.circle2d(148, [9.4, 0.3], 0.9, 0.03, 3);
        }
        BenchmarkDataset::Ellipses => {
            b.ellipse2d(79, [0.0, 0.0], 2.0, 1.0, 0.02, 0);
            b.ellipse2d(79, [5.2, 0.0], 1.5, 0.9, 0.02, 1);
        }
        BenchmarkDataset::SpheresGrid => {
            b.circle2d(233, [0.0, 0.0], 1.2, 0.03, 0);
            b.circle2d(233, [4.0, 0.5], 1.0, 0.03, 1);
            b.grid2d(20, 20, [-2.0, -12.0], 0.5, 2);
        }
        BenchmarkDataset::HalvedCircle => {
            b.circle2d(166, [0.0, 0.0], 1.0, 0.02, 0);
            b.arc2d(83, [3.6, 0.0], 1.4, 0.0, std::f64::consts::PI, 0.02, 1);
        }
        BenchmarkDataset::TwoSpheresTwoCircles => {
            b.sphere3d(1500, [0.0, 0.0, 0.0], 1.2, 0.02, 0);
            b.sphere3d(1500, [4.5, 0.0, 0.0], 1.0, 0.02, 1);
            b.circle(800, &[0.0, 5.5, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], 2.0, 0.02, 2);
            b.circle(800, &[4.5, 5.5, 0.5], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], 1.8, 0.02, 3);
        }
        BenchmarkDataset::SphereInCircle => {
            b.sphere3d(178, [0.0, 0.0, 0.0], 1.0, 0.02, 0);
            b.circle(89, &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 2.2, 0.02, 1);
        }
        BenchmarkDataset::Spaceship => {
            b.sphere3d(300, [0.0, 0.0, 0.0], 1.0, 0.02, 0);
            b.circle(120, &[-2.6, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], 0.9, 0.02, 1);
            b.circle(120, &[2.6, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], 0.9, 0.02, 2);
            b.plate3d(11, 10, [-1.2, 1.2], [-0.5, 0.5], -1.8, 0.02, 3);
        }
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_point_counts_at_scale_one() {
        for ds in BenchmarkDataset::ALL {
            let pc = generate_benchmark(&BenchmarkSpec::new(ds, 1)).unwrap();
            assert_eq!(pc.len(), ds.point_count(), "{}", ds.name());
            assert_eq!(pc.ambient_dim(), ds.ambient_dim(), "{}", ds.name());
        }
    }

    #[test]
    fn label_count_matches_cluster_count() {
        for ds in BenchmarkDataset::ALL {
            let pc = generate_benchmark(&BenchmarkSpec::new(ds, 5)).unwrap();
            let mut labels: Vec<i64> = pc.labels().unwrap().to_vec();
            labels.sort_unstable();
            labels.dedup();
            assert_eq!(labels.len(), ds.cluster_count(), "{}", ds.name());
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = BenchmarkSpec::new(BenchmarkDataset::Ellipses, 7);
        let a = generate_benchmark(&spec).unwrap();
        let b = generate_benchmark(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate_benchmark(&BenchmarkSpec::new(BenchmarkDataset::Ellipses, 1)).unwrap();
        let b = generate_benchmark(&BenchmarkSpec::new(BenchmarkDataset::Ellipses, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn scale_reduces_point_count() {
        let spec = BenchmarkSpec::new(BenchmarkDataset::TwoSpheresTwoCircles, 1).with_scale(0.22);
        let pc = generate_benchmark(&spec).unwrap();
        assert!(pc.len() >= 900 && pc.len() <= 1100, "len = {}", pc.len());
    }

    #[test]
    fn parse_accepts_aliases() {
        assert_eq!(
            BenchmarkDataset::parse("2Spheres2Circles").unwrap(),
            BenchmarkDataset::TwoSpheresTwoCircles
        );
        assert_eq!(
            BenchmarkDataset::parse("4spheres").unwrap(),
            BenchmarkDataset::FourSpheres
        );
        assert_eq!(
            BenchmarkDataset::parse("Spheres+Grid").unwrap(),
            BenchmarkDataset::SpheresGrid
        );
        assert!(BenchmarkDataset::parse("no-such-set").is_err());
    }
}
