//! Point-cloud ingestion, serialization and perturbation.
//!
//! Clouds are immutable after construction: every operation returns a new
//! cloud. Coordinates are stored in a flat row-major buffer.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, TopfError};

/// Label assigned to points appended by [`add_outliers`].
pub const OUTLIER_LABEL: i64 = -1;

/// A finite set of points in R^n with optional integer ground-truth labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    ambient_dim: usize,
    labels: Option<Vec<i64>>,
}

impl PointCloud {
    /// Builds a cloud from per-point coordinate vectors.
    ///
    /// Fails on an empty list, ragged rows, non-finite coordinates, or a
    /// label vector whose length does not match the point count.
    pub fn new(points: Vec<Vec<f64>>, labels: Option<Vec<i64>>) -> Result<PointCloud> {
        if points.is_empty() {
            return Err(TopfError::EmptyInput);
        }
        let ambient_dim = points[0].len();
        if ambient_dim == 0 {
            return Err(TopfError::InvalidParameter(
                "points must have at least one coordinate".into(),
            ));
        }
        let mut coords = Vec::with_capacity(points.len() * ambient_dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient_dim {
                return Err(TopfError::ColumnMismatch {
                    line: i + 1,
                    expected: ambient_dim,
                    found: p.len(),
                });
            }
            for &c in p {
                if !c.is_finite() {
                    return Err(TopfError::Parse {
                        line: i + 1,
                        msg: format!("non-finite coordinate {c}"),
                    });
                }
                coords.push(c);
            }
        }
        let cloud = PointCloud {
            coords,
            ambient_dim,
            labels: None,
        };
        cloud.with_labels(labels)
    }

    /// Replaces the label vector, validating its length.
    pub fn with_labels(mut self, labels: Option<Vec<i64>>) -> Result<PointCloud> {
        if let Some(ref l) = labels {
            if l.len() != self.len() {
                return Err(TopfError::InvalidParameter(format!(
                    "label count {} does not match point count {}",
                    l.len(),
                    self.len()
                )));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.ambient_dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.ambient_dim;
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.ambient_dim)
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    /// Per-axis mean of the cloud.
    pub fn centroid(&self) -> Vec<f64> {
        let d = self.ambient_dim;
        let n = self.len() as f64;
        let mut c = vec![0.0; d];
        for p in self.iter_points() {
            for (acc, &x) in c.iter_mut().zip(p) {
                *acc += x;
            }
        }
        c.iter_mut().for_each(|x| *x /= n);
        c
    }

    /// Per-axis population standard deviation.
    pub fn axis_std(&self) -> Vec<f64> {
        let d = self.ambient_dim;
        let n = self.len() as f64;
        let c = self.centroid();
        let mut var = vec![0.0; d];
        for p in self.iter_points() {
            for ((acc, &x), &m) in var.iter_mut().zip(p).zip(&c) {
                *acc += (x - m) * (x - m);
            }
        }
        var.iter().map(|v| (v / n).sqrt()).collect()
    }
}

/// Input/output text layout for point clouds.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InputFormat {
    /// Comma-separated values, one point per row.
    Csv,
    /// Whitespace-separated values, one point per row.
    Whitespace,
}

impl InputFormat {
    fn split(self, line: &str) -> Vec<&str> {
        match self {
            InputFormat::Csv => line.split(',').map(str::trim).collect(),
            InputFormat::Whitespace => line.split_whitespace().collect(),
        }
    }

    fn separator(self) -> &'static str {
        match self {
            InputFormat::Csv => ",",
            InputFormat::Whitespace => " ",
        }
    }
}

/// Reads a point cloud from a text file.
///
/// Every row must carry the same number of numeric columns. With
/// `with_labels`, the final column is parsed as an integer label instead of
/// a coordinate.
pub fn load_point_cloud(
    path: impl AsRef<Path>,
    format: InputFormat,
    with_labels: bool,
) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TopfError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_point_cloud(&text, format, with_labels)
}

/// Parses point-cloud text; see [`load_point_cloud`].
pub fn parse_point_cloud(
    text: &str,
    format: InputFormat,
    with_labels: bool,
) -> Result<PointCloud> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    let mut expected_cols: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields = format.split(line);
        let cols = fields.len();
        match expected_cols {
            None => {
                let min_cols = if with_labels { 2 } else { 1 };
                if cols < min_cols {
                    return Err(TopfError::Parse {
                        line: line_no,
                        msg: format!("expected at least {min_cols} columns, found {cols}"),
                    });
                }
                expected_cols = Some(cols);
            }
            Some(expected) if cols != expected => {
                return Err(TopfError::ColumnMismatch {
                    line: line_no,
                    expected,
                    found: cols,
                });
            }
            _ => {}
        }

        let coord_cols = if with_labels { cols - 1 } else { cols };
        let mut row = Vec::with_capacity(coord_cols);
        for field in &fields[..coord_cols] {
            let v: f64 = field.parse().map_err(|_| TopfError::Parse {
                line: line_no,
                msg: format!("invalid number {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(TopfError::Parse {
                    line: line_no,
                    msg: format!("non-finite coordinate {field:?}"),
                });
            }
            row.push(v);
        }
        if with_labels {
            let field = fields[cols - 1];
            labels.push(field.parse().map_err(|_| TopfError::Parse {
                line: line_no,
                msg: format!("invalid integer label {field:?}"),
            })?);
        }
        points.push(row);
    }

    PointCloud::new(points, if with_labels { Some(labels) } else { None })
}

/// Serializes a cloud in a layout that [`load_point_cloud`] reads back
/// exactly (floats are written shortest-round-trip). Labels, when present,
/// are appended as a final integer column.
pub fn format_point_cloud(pc: &PointCloud, format: InputFormat) -> String {
    let sep = format.separator();
    let mut out = String::new();
    for (i, p) in pc.iter_points().enumerate() {
        let mut first = true;
        for &c in p {
            if !first {
                out.push_str(sep);
            }
            let _ = write!(out, "{c}");
            first = false;
        }
        if let Some(labels) = pc.labels() {
            let _ = write!(out, "{sep}{}", labels[i]);
        }
        out.push('\n');
    }
    out
}

/// Writes a cloud to disk; see [`format_point_cloud`].
pub fn save_point_cloud(pc: &PointCloud, path: impl AsRef<Path>, format: InputFormat) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_point_cloud(pc, format)).map_err(|source| TopfError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Perturbs every coordinate independently by N(0, sigma^2). Labels are
/// preserved; `sigma = 0` returns the input unchanged.
pub fn add_gaussian_noise(pc: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud> {
    if !(sigma >= 0.0) {
        return Err(TopfError::InvalidParameter(format!(
            "noise sigma must be nonnegative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(pc.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma validated above");
    let points = pc
        .iter_points()
        .map(|p| p.iter().map(|&c| c + normal.sample(&mut rng)).collect())
        .collect();
    PointCloud::new(points, pc.labels.clone())
}

/// Appends `count` outlier points drawn from an axis-aligned Gaussian whose
/// per-axis standard deviation matches the input cloud, centered at the
/// cloud centroid. New points carry [`OUTLIER_LABEL`]; if the input cloud is
/// unlabeled, original points are labeled 0.
pub fn add_outliers(pc: &PointCloud, count: usize, seed: u64) -> Result<PointCloud> {
    if pc.is_empty() {
        return Err(TopfError::EmptyInput);
    }
    if count == 0 {
        return Ok(pc.clone());
    }
    let centroid = pc.centroid();
    let std = pc.axis_std();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normals: Vec<Normal<f64>> = std
        .iter()
        .map(|&s| Normal::new(0.0, s.max(f64::MIN_POSITIVE)).expect("std is finite"))
        .collect();

    let mut points: Vec<Vec<f64>> = pc.iter_points().map(<[f64]>::to_vec).collect();
    for _ in 0..count {
        let p = centroid
            .iter()
            .zip(&normals)
            .map(|(&c, n)| c + n.sample(&mut rng))
            .collect();
        points.push(p);
    }
    let mut labels = match pc.labels() {
        Some(l) => l.to_vec(),
        None => vec![0; pc.len()],
    };
    labels.extend(std::iter::repeat(OUTLIER_LABEL).take(count));
    PointCloud::new(points, Some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic_csv() {
        let pc = parse_point_cloud("0,0\n1,0\n0,1", InputFormat::Csv, false).unwrap();
        assert_eq!(pc.len(), 3);
        assert_eq!(pc.ambient_dim(), 2);
        assert_eq!(pc.point(1), &[1.0, 0.0]);
    }

    #[test]
    fn parse_rejects_nan_token() {
        let err = parse_point_cloud("0,0\nNaN,1", InputFormat::Csv, false).unwrap_err();
        assert!(matches!(err, TopfError::Parse { line: 2, .. }));
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        let err = parse_point_cloud("0,0\n1,2,3", InputFormat::Csv, false).unwrap_err();
        assert!(matches!(
            err,
            TopfError::ColumnMismatch {
                line: 2,
                expected: 2,
                found: 3
            }
        ));
    }

    #[test]
    fn parse_rejects_empty() {
        assert!(matches!(
            parse_point_cloud("", InputFormat::Csv, false),
            Err(TopfError::EmptyInput)
        ));
    }

    #[test]
    fn parse_labels_column() {
        let pc = parse_point_cloud("0 0 1\n1 0 1\n5 5 2", InputFormat::Whitespace, true).unwrap();
        assert_eq!(pc.ambient_dim(), 2);
        assert_eq!(pc.labels(), Some(&[1, 1, 2][..]));
    }

    #[test]
    fn round_trip_both_formats() {
        let pc = PointCloud::new(
            vec![vec![0.1, -2.5e-3], vec![1.0 / 3.0, 7.25], vec![1e-300, 4.0]],
            Some(vec![0, 1, 2]),
        )
        .unwrap();
        for format in [InputFormat::Csv, InputFormat::Whitespace] {
            let text = format_point_cloud(&pc, format);
            let back = parse_point_cloud(&text, format, true).unwrap();
            assert_eq!(back, pc);
        }
    }

    #[test]
    fn noise_zero_sigma_is_identity() {
        let pc = PointCloud::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], None).unwrap();
        assert_eq!(add_gaussian_noise(&pc, 0.0, 7).unwrap(), pc);
    }

    #[test]
    fn noise_rejects_negative_sigma() {
        let pc = PointCloud::new(vec![vec![1.0]], None).unwrap();
        assert!(add_gaussian_noise(&pc, -0.1, 7).is_err());
    }

    #[test]
    fn noise_is_deterministic() {
        let pc = PointCloud::new(vec![vec![1.0, 2.0]; 50], None).unwrap();
        let a = add_gaussian_noise(&pc, 0.1, 42).unwrap();
        let b = add_gaussian_noise(&pc, 0.1, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, pc);
    }

    #[test]
    fn noise_mean_displacement_near_zero() {
        // Statistical oracle: mean displacement over n points is within
        // 3*sigma/sqrt(n) of zero per axis.
        let n = 10_000;
        let sigma = 0.5;
        let pc = PointCloud::new(vec![vec![0.0, 0.0]; n], None).unwrap();
        let noisy = add_gaussian_noise(&pc, sigma, 3).unwrap();
        let tol = 3.0 * sigma / (n as f64).sqrt();
        for axis in 0..2 {
            let mean: f64 = (0..n).map(|i| noisy.point(i)[axis]).sum::<f64>() / n as f64;
            assert!(mean.abs() < tol, "axis {axis} mean {mean} vs tol {tol}");
        }
    }

    #[test]
    fn outliers_zero_count_is_identity() {
        let pc = PointCloud::new(vec![vec![1.0], vec![2.0]], None).unwrap();
        assert_eq!(add_outliers(&pc, 0, 1).unwrap(), pc);
    }

    #[test]
    fn outliers_cardinality_and_label() {
        let pc = PointCloud::new(vec![vec![0.0, 0.0]; 200], Some(vec![3; 200])).unwrap();
        let out = add_outliers(&pc, 50, 9).unwrap();
        assert_eq!(out.len(), 250);
        let labels = out.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == OUTLIER_LABEL).count(), 50);
        assert_eq!(&labels[..200], &[3; 200][..]);
    }

    #[test]
    fn outliers_match_cloud_std() {
        // Statistical oracle: with 10^4 outliers the sampled per-axis std is
        // within 20% of the source cloud's per-axis std.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let points: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![2.0 * normal.sample(&mut rng), 0.5 * normal.sample(&mut rng) + 4.0])
            .collect();
        let pc = PointCloud::new(points, None).unwrap();
        let base_std = pc.axis_std();

        let n_out = 10_000;
        let out = add_outliers(&pc, n_out, 11).unwrap();
        let tail = PointCloud::new(
            (pc.len()..out.len()).map(|i| out.point(i).to_vec()).collect(),
            None,
        )
        .unwrap();
        let out_std = tail.axis_std();
        for axis in 0..2 {
            let ratio = out_std[axis] / base_std[axis];
            assert!(
                (0.8..1.2).contains(&ratio),
                "axis {axis} std ratio {ratio}"
            );
        }
    }
}
