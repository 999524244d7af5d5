//! Quantitative experiment harness: k-means clustering on feature rows,
//! adjusted Rand index scoring, the benchmark-suite table, and
//! noise/outlier robustness sweeps.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TopfError};
use crate::features::{topf, TopfConfig};
use crate::pointcloud::{add_gaussian_noise, add_outliers};
use crate::tcbs::{generate_benchmark, BenchmarkDataset, BenchmarkSpec};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic per-task seed derivation from a master seed.
fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut acc = splitmix64(master);
    for &p in parts {
        acc = splitmix64(acc ^ p.wrapping_mul(0x9e3779b97f4a7c15));
    }
    acc
}

/// Lloyd iterations with k-means++ seeding, best of `restarts` by inertia.
/// Deterministic for a fixed seed.
pub fn kmeans(rows: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<Vec<usize>> {
    let n = rows.len();
    if k == 0 || k > n {
        return Err(TopfError::InvalidParameter(format!(
            "k must lie in 1..={n}, got {k}"
        )));
    }
    let dim = rows.first().map_or(0, Vec::len);
    if k == 1 || dim == 0 {
        return Ok(vec![0; n]);
    }
    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[restart as u64]));

        // k-means++ seeding.
        let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
        centroids.push(rows[rng.gen_range(0..n)].clone());
        let mut d2: Vec<f64> = rows.iter().map(|r| dist2(r, &centroids[0])).collect();
        while centroids.len() < k {
            let total: f64 = d2.iter().sum();
            let next = if total > 0.0 {
                let mut target = rng.gen::<f64>() * total;
                let mut chosen = n - 1;
                for (i, &w) in d2.iter().enumerate() {
                    target -= w;
                    if target <= 0.0 {
                        chosen = i;
                        break;
                    }
                }
                chosen
            } else {
                rng.gen_range(0..n)
            };
            centroids.push(rows[next].clone());
            for (i, row) in rows.iter().enumerate() {
                d2[i] = d2[i].min(dist2(row, centroids.last().unwrap()));
            }
        }

        // Lloyd iterations.
        let mut assignment = vec![0usize; n];
        for _iter in 0..100 {
            let mut changed = false;
            for (i, row) in rows.iter().enumerate() {
                let mut best_c = 0;
                let mut best_d = f64::INFINITY;
                for (c, centroid) in centroids.iter().enumerate() {
                    let d = dist2(row, centroid);
                    if d < best_d {
                        best_d = d;
                        best_c = c;
                    }
                }
                if assignment[i] != best_c {
                    assignment[i] = best_c;
                    changed = true;
                }
            }
            let mut counts = vec![0usize; k];
            let mut sums = vec![vec![0.0; dim]; k];
            for (i, row) in rows.iter().enumerate() {
                counts[assignment[i]] += 1;
                for (s, &v) in sums[assignment[i]].iter_mut().zip(row) {
                    *s += v;
                }
            }
            for c in 0..k {
                if counts[c] > 0 {
                    for (m, &s) in centroids[c].iter_mut().zip(&sums[c]) {
                        *m = s / counts[c] as f64;
                    }
                } else {
                    // Reseed an empty cluster at the point farthest from its
                    // centroid (lowest index on ties).
                    let far = (0..n)
                        .max_by(|&a, &b| {
                            dist2(&rows[a], &centroids[assignment[a]])
                                .total_cmp(&dist2(&rows[b], &centroids[assignment[b]]))
                                .then(b.cmp(&a))
                        })
                        .unwrap();
                    centroids[c] = rows[far].clone();
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let inertia: f64 = rows
            .iter()
            .zip(&assignment)
            .map(|(row, &c)| dist2(row, &centroids[c]))
            .sum();
        if best.as_ref().map_or(true, |(bi, _)| inertia < *bi) {
            best = Some((inertia, assignment));
        }
    }
    Ok(best.expect("at least one restart").1)
}

/// Adjusted Rand index from the pair-counting contingency table.
pub fn adjusted_rand_index(a: &[i64], b: &[i64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(TopfError::InvalidParameter(format!(
            "label length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n == 0 {
        return Err(TopfError::EmptyInput);
    }
    let comb2 = |x: u64| -> f64 { (x * x.saturating_sub(1)) as f64 / 2.0 };
    let mut cells: std::collections::HashMap<(i64, i64), u64> = std::collections::HashMap::new();
    let mut rows: std::collections::HashMap<i64, u64> = std::collections::HashMap::new();
    let mut cols: std::collections::HashMap<i64, u64> = std::collections::HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let sum_cells: f64 = cells.values().map(|&v| comb2(v)).sum();
    let sum_rows: f64 = rows.values().map(|&v| comb2(v)).sum();
    let sum_cols: f64 = cols.values().map(|&v| comb2(v)).sum();
    let total = comb2(n as u64);
    let expected = sum_rows * sum_cols / total;
    let max_index = (sum_rows + sum_cols) / 2.0;
    let denom = max_index - expected;
    if denom == 0.0 {
        // Both partitions are trivial (all singletons or one cluster).
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / denom)
}

/// One dataset/repeat cell of a benchmark run.
#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkCell {
    pub dataset: String,
    pub repeat: usize,
    pub seed: u64,
    pub ari: Option<f64>,
    pub runtime_seconds: f64,
    pub error: Option<String>,
}

/// Aggregated per-dataset row.
#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub repeats: usize,
    pub failures: usize,
    pub mean_ari: f64,
    pub std_ari: f64,
    pub mean_runtime_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub cells: Vec<BenchmarkCell>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Number of k-means restarts used by the harness.
const KMEANS_RESTARTS: usize = 10;

fn cluster_and_score(
    pc: &crate::pointcloud::PointCloud,
    k: usize,
    config: &TopfConfig,
    seed: u64,
    score_prefix: Option<usize>,
) -> Result<(f64, f64)> {
    let start = Instant::now();
    let result = topf(pc, config)?;
    let rows = result.matrix.augmented_rows();
    let predicted = kmeans(&rows, k, derive_seed(seed, &[0xC1]), KMEANS_RESTARTS)?;
    let runtime = start.elapsed().as_secs_f64();
    let truth = pc
        .labels()
        .ok_or_else(|| TopfError::Other("benchmark cloud is unlabeled".into()))?;
    let predicted: Vec<i64> = predicted.iter().map(|&c| c as i64).collect();
    let limit = score_prefix.unwrap_or(truth.len());
    let ari = adjusted_rand_index(&truth[..limit], &predicted[..limit])?;
    Ok((ari, runtime))
}

/// Runs the clustering benchmark: per dataset and repeat, generate the cloud
/// with a derived seed, compute features, cluster with k = true cluster
/// count, and score against ground truth. Per-cell failures are recorded and
/// the run continues.
pub fn run_benchmark(
    datasets: &[BenchmarkDataset],
    config: &TopfConfig,
    repeats: usize,
    master_seed: u64,
    scale: f64,
) -> BenchmarkReport {
    let tasks: Vec<(usize, BenchmarkDataset, usize)> = datasets
        .iter()
        .enumerate()
        .flat_map(|(di, &ds)| (0..repeats.max(1)).map(move |r| (di, ds, r)))
        .collect();

    let cells: Vec<BenchmarkCell> = tasks
        .par_iter()
        .map(|&(di, ds, repeat)| {
            let seed = derive_seed(master_seed, &[di as u64, repeat as u64]);
            let spec = BenchmarkSpec::new(ds, seed).with_scale(scale);
            let outcome = generate_benchmark(&spec)
                .and_then(|pc| cluster_and_score(&pc, ds.cluster_count(), config, seed, None));
            match outcome {
                Ok((ari, runtime)) => BenchmarkCell {
                    dataset: ds.name().to_string(),
                    repeat,
                    seed,
                    ari: Some(ari),
                    runtime_seconds: runtime,
                    error: None,
                },
                Err(e) => BenchmarkCell {
                    dataset: ds.name().to_string(),
                    repeat,
                    seed,
                    ari: None,
                    runtime_seconds: 0.0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let rows = datasets
        .iter()
        .map(|ds| {
            let ds_cells: Vec<&BenchmarkCell> =
                cells.iter().filter(|c| c.dataset == ds.name()).collect();
            let aris: Vec<f64> = ds_cells.iter().filter_map(|c| c.ari).collect();
            let runtimes: Vec<f64> = ds_cells
                .iter()
                .filter(|c| c.error.is_none())
                .map(|c| c.runtime_seconds)
                .collect();
            let (mean_ari, std_ari) = mean_std(&aris);
            let (mean_runtime, _) = mean_std(&runtimes);
            BenchmarkRow {
                dataset: ds.name().to_string(),
                repeats: ds_cells.len(),
                failures: ds_cells.len() - aris.len(),
                mean_ari,
                std_ari,
                mean_runtime_s: mean_runtime,
            }
        })
        .collect();

    BenchmarkReport { rows, cells }
}

/// Report CSV: "dataset,repeats,mean_ari,std_ari,mean_runtime_s".
pub fn benchmark_csv(report: &BenchmarkReport, redact_timings: bool) -> String {
    let mut out = String::from("dataset,repeats,mean_ari,std_ari,mean_runtime_s\n");
    for row in &report.rows {
        let runtime = if redact_timings { 0.0 } else { row.mean_runtime_s };
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6}",
            row.dataset, row.repeats, row.mean_ari, row.std_ari, runtime
        );
    }
    out
}

/// JSON mirror with per-repeat detail.
pub fn benchmark_json(report: &BenchmarkReport, redact_timings: bool) -> String {
    let mut report = report.clone();
    if redact_timings {
        for row in &mut report.rows {
            row.mean_runtime_s = 0.0;
        }
        for cell in &mut report.cells {
            cell.runtime_seconds = 0.0;
        }
    }
    serde_json::to_string_pretty(&report).expect("report serialization")
}

/// Perturbation family of a robustness sweep.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SweepKind {
    /// i.i.d. Gaussian coordinate noise; the grid is sigma.
    Gaussian,
    /// Appended outliers; the grid value is the outlier count.
    Outliers,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Gaussian => "gaussian",
            SweepKind::Outliers => "outliers",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub level: f64,
    pub repeats: usize,
    pub failures: usize,
    pub mean_ari: f64,
    pub std_ari: f64,
    /// 95% normal-approximation half-width over repeats.
    pub ci95: f64,
    pub aris: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub dataset: String,
    pub kind: SweepKind,
    pub cells: Vec<SweepCell>,
}

/// Sweeps a perturbation grid. For outliers the score is restricted to the
/// original points; clustering still sees the perturbed cloud.
pub fn robustness_sweep(
    dataset: BenchmarkDataset,
    kind: SweepKind,
    grid: &[f64],
    repeats: usize,
    config: &TopfConfig,
    master_seed: u64,
    scale: f64,
) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(TopfError::InvalidParameter("empty sweep grid".into()));
    }
    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..repeats.max(1)).map(move |r| (g, r)))
        .collect();

    let outcomes: Vec<(usize, std::result::Result<f64, String>)> = tasks
        .par_iter()
        .map(|&(g, repeat)| {
            let base_seed = derive_seed(master_seed, &[repeat as u64]);
            let level = grid[g];
            let run = || -> Result<f64> {
                let spec = BenchmarkSpec::new(dataset, base_seed).with_scale(scale);
                let pc = generate_benchmark(&spec)?;
                let n_original = pc.len();
                let perturb_seed = derive_seed(master_seed, &[repeat as u64, g as u64, 0xA5]);
                let (perturbed, prefix) = match kind {
                    SweepKind::Gaussian => (add_gaussian_noise(&pc, level, perturb_seed)?, None),
                    SweepKind::Outliers => (
                        add_outliers(&pc, level.round() as usize, perturb_seed)?,
                        Some(n_original),
                    ),
                };
                let (ari, _runtime) = cluster_and_score(
                    &perturbed,
                    dataset.cluster_count(),
                    config,
                    base_seed,
                    prefix,
                )?;
                Ok(ari)
            };
            (g, run().map_err(|e| e.to_string()))
        })
        .collect();

    let cells = grid
        .iter()
        .enumerate()
        .map(|(g, &level)| {
            let aris: Vec<f64> = outcomes
                .iter()
                .filter(|(gi, _)| *gi == g)
                .filter_map(|(_, r)| r.as_ref().ok().copied())
                .collect();
            let total = outcomes.iter().filter(|(gi, _)| *gi == g).count();
            let (mean_ari, std_ari) = mean_std(&aris);
            let ci95 = if aris.is_empty() {
                f64::NAN
            } else {
                1.96 * std_ari / (aris.len() as f64).sqrt()
            };
            SweepCell {
                level,
                repeats: total,
                failures: total - aris.len(),
                mean_ari,
                std_ari,
                ci95,
                aris,
            }
        })
        .collect();

    Ok(SweepReport {
        dataset: dataset.name().to_string(),
        kind,
        cells,
    })
}

/// Sweep CSV: "dataset,kind,level,repeats,mean_ari,std_ari,ci95".
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("dataset,kind,level,repeats,mean_ari,std_ari,ci95\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            report.dataset, report.kind.name(), c.level, c.repeats, c.mean_ari, c.std_ari, c.ci95
        );
    }
    out
}

pub fn sweep_json(report: &SweepReport) -> String {
    serde_json::to_string_pretty(report).expect("sweep serialization")
}
