//! Normalization, thresholding and per-point aggregation of harmonic
//! chains, and the end-to-end feature pipeline.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{
    build_alpha_filtration, build_vr_filtration, FilteredComplex, SnapshotComplex,
    DEFAULT_SIMPLEX_BUDGET,
};
use crate::error::{Result, TopfError};
use crate::harmonic::{
    chain_to_csv, embed_generator, harmonic_project, interpolation_time, simplicial_weights,
    RealChain, WeightScheme, DEFAULT_EFFRES_BUDGET,
};
use crate::persistence::compute_persistence;
use crate::pointcloud::PointCloud;
use crate::selection::{select_features, DimCut, SelectionParams};

/// Normalizes a harmonic chain to [0, 1]: |e| is divided by `delta` times
/// the maximum magnitude, values above 1 clip to 1. An identically zero
/// chain is degenerate.
pub fn normalize_threshold(e_hat: &RealChain, delta: f64) -> Result<RealChain> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(TopfError::InvalidParameter(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let max = e_hat.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Err(TopfError::DegenerateFeature);
    }
    let scale = delta * max;
    Ok(RealChain {
        dim: e_hat.dim,
        values: e_hat
            .values
            .iter()
            .map(|v| (v.abs() / scale).min(1.0))
            .collect(),
    })
}

/// Mean of the incident k-simplex values per point; points with no incident
/// k-simplex in the snapshot get 0.
pub fn aggregate_to_points(ne: &RealChain, sc: &SnapshotComplex, n_points: usize) -> Vec<f64> {
    let mut sums = vec![0.0f64; n_points];
    let mut counts = vec![0usize; n_points];
    for (simplex, value) in sc.simplices(ne.dim).iter().zip(&ne.values) {
        for &v in simplex.vertices() {
            sums[v as usize] += value;
            counts[v as usize] += 1;
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(&s, &c)| s / c.max(1) as f64)
        .collect()
}

/// Which filtration the pipeline builds.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ComplexChoice {
    /// Alpha for ambient dimension 2 or 3, Vietoris–Rips otherwise.
    Auto,
    Alpha,
    VietorisRips,
}

/// Pipeline configuration. Defaults are the reference hyperparameters:
/// max homology dimension `ambient − 1`, λ = 0.3, δ = 0.07, β = 0,
/// triangle weights.
#[derive(Clone, Debug)]
pub struct TopfConfig {
    pub max_dim: Option<usize>,
    pub complex: ComplexChoice,
    pub max_radius: Option<f64>,
    pub simplex_budget: usize,
    pub lambda: f64,
    /// Opt-in linear interpolation of the snapshot step (k >= 1).
    pub linear_interpolation: bool,
    pub delta: f64,
    pub selection: SelectionParams,
    pub weights: WeightScheme,
    pub effres_budget: usize,
    /// Collect per-feature harmonic chain dumps (CSV) in the result.
    pub dump_harmonic: bool,
}

impl Default for TopfConfig {
    fn default() -> TopfConfig {
        TopfConfig {
            max_dim: None,
            complex: ComplexChoice::Auto,
            max_radius: None,
            simplex_budget: DEFAULT_SIMPLEX_BUDGET,
            lambda: 0.3,
            linear_interpolation: false,
            delta: 0.07,
            selection: SelectionParams::default(),
            weights: WeightScheme::Triangle,
            effres_budget: DEFAULT_EFFRES_BUDGET,
            dump_harmonic: false,
        }
    }
}

/// Column metadata of the feature matrix.
#[derive(Clone, Debug, Serialize)]
pub struct FeatureMeta {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
    pub snapshot_t: f64,
    pub n_snapshot_simplices: usize,
}

/// |X| x |F| matrix of per-point feature values in [0, 1], column order
/// matching the selected feature order.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    n_points: usize,
    columns: Vec<Vec<f64>>,
    pub meta: Vec<FeatureMeta>,
}

impl FeatureMatrix {
    pub fn empty(n_points: usize) -> FeatureMatrix {
        FeatureMatrix {
            n_points,
            columns: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, point: usize, feature: usize) -> f64 {
        self.columns[feature][point]
    }

    pub fn column(&self, feature: usize) -> &[f64] {
        &self.columns[feature]
    }

    pub fn row(&self, point: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[point]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_points).map(|i| self.row(i)).collect()
    }

    /// Rows extended by a "no feature" column 1 − max(row), used as the
    /// clustering input so points without any topological feature form
    /// their own signature.
    pub fn augmented_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_points)
            .map(|i| {
                let mut row = self.row(i);
                let max = row.iter().fold(0.0f64, |m, &v| m.max(v));
                row.push(1.0 - max);
                row
            })
            .collect()
    }

    /// CSV with header "x0,..,x{n-1},f0,..,f{F-1}": coordinates then
    /// feature values, one point per row.
    pub fn to_csv(&self, pc: &PointCloud) -> String {
        let mut out = String::new();
        let mut header: Vec<String> = (0..pc.ambient_dim()).map(|i| format!("x{i}")).collect();
        header.extend((0..self.n_features()).map(|i| format!("f{i}")));
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.n_points {
            let mut fields: Vec<String> = pc.point(i).iter().map(|c| format!("{c}")).collect();
            fields.extend(self.columns.iter().map(|c| format!("{}", c[i])));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON sidecar describing each column.
    pub fn metadata_json(&self) -> String {
        #[derive(Serialize)]
        struct MetaOut<'a> {
            n_points: usize,
            n_features: usize,
            columns: Vec<ColumnOut<'a>>,
        }
        #[derive(Serialize)]
        struct ColumnOut<'a> {
            index: usize,
            #[serde(flatten)]
            meta: &'a FeatureMeta,
        }
        let out = MetaOut {
            n_points: self.n_points,
            n_features: self.n_features(),
            columns: self
                .meta
                .iter()
                .enumerate()
                .map(|(index, meta)| ColumnOut { index, meta })
                .collect(),
        };
        serde_json::to_string_pretty(&out).expect("metadata serialization")
    }
}

/// Full pipeline result.
#[derive(Clone, Debug)]
pub struct TopfResult {
    pub matrix: FeatureMatrix,
    /// Per-dimension selection diagnostics.
    pub cuts: Vec<DimCut>,
    /// Features dropped because their harmonic representative vanished.
    pub dropped: Vec<FeatureMeta>,
    /// Per-feature harmonic chain CSV dumps when requested.
    pub harmonic_csv: Vec<(usize, String)>,
}

fn build_filtration(pc: &PointCloud, config: &TopfConfig, max_dim: usize) -> Result<FilteredComplex> {
    let use_alpha = match config.complex {
        ComplexChoice::Alpha => true,
        ComplexChoice::VietorisRips => false,
        ComplexChoice::Auto => (2..=3).contains(&pc.ambient_dim()),
    };
    if use_alpha {
        build_alpha_filtration(pc, max_dim)
    } else {
        build_vr_filtration(pc, max_dim, config.max_radius, config.simplex_budget)
    }
}

/// Computes topological point features: filtration, persistence, selection,
/// per-feature harmonic projection, normalization and aggregation.
/// Deterministic in the input and configuration.
pub fn topf(pc: &PointCloud, config: &TopfConfig) -> Result<TopfResult> {
    if pc.is_empty() {
        return Err(TopfError::EmptyInput);
    }
    let max_dim = config
        .max_dim
        .unwrap_or_else(|| pc.ambient_dim().saturating_sub(1));
    let fc = build_filtration(pc, config, max_dim)?;
    let mut diagram = compute_persistence(&fc, max_dim)?;
    // Essential classes get a finite death at the cloud diameter: unlike the
    // raw maximum filtration value, this is not inflated by the huge
    // circumradii of near-collinear hull slivers in alpha filtrations.
    diagram.essential_death_proxy = pc.diameter();
    let dims: Vec<usize> = (0..=max_dim).collect();
    let selected = select_features(&diagram, &config.selection, &dims)?;

    if selected.is_empty() {
        log::warn!("no features selected; returning an empty feature matrix");
        return Ok(TopfResult {
            matrix: FeatureMatrix::empty(pc.len()),
            cuts: selected.cuts,
            dropped: Vec::new(),
            harmonic_csv: Vec::new(),
        });
    }

    struct ColumnOutput {
        meta: FeatureMeta,
        column: Option<Vec<f64>>,
        dump: Option<String>,
    }

    let columns: Vec<ColumnOutput> = selected
        .features
        .par_iter()
        .enumerate()
        .map(|(index, feature)| -> Result<ColumnOutput> {
            let annotate = |source: TopfError| TopfError::Feature {
                index,
                dim: feature.dim,
                birth: feature.birth,
                death: feature.death,
                source: Box::new(source),
            };
            let t = interpolation_time(
                feature.birth,
                feature.death,
                feature.dim,
                config.lambda,
                config.linear_interpolation,
            )
            .map_err(annotate)?
            .max(feature.birth);
            let sc = fc.snapshot(t);
            let weights = simplicial_weights(&sc, feature.dim, config.weights, config.effres_budget)
                .map_err(annotate)?;
            let embedded = embed_generator(&feature.generator, &sc, feature.dim).map_err(annotate)?;
            let projected = harmonic_project(&embedded, &sc, &weights).map_err(annotate)?;
            let meta = FeatureMeta {
                dim: feature.dim,
                birth: feature.birth,
                death: feature.death,
                essential: feature.essential,
                snapshot_t: t,
                n_snapshot_simplices: sc.total_simplices(),
            };
            match normalize_threshold(&projected, config.delta) {
                Ok(normalized) => {
                    let dump = config
                        .dump_harmonic
                        .then(|| chain_to_csv(&projected, &sc));
                    let column = aggregate_to_points(&normalized, &sc, pc.len());
                    Ok(ColumnOutput {
                        meta,
                        column: Some(column),
                        dump,
                    })
                }
                Err(TopfError::DegenerateFeature) => Ok(ColumnOutput {
                    meta,
                    column: None,
                    dump: None,
                }),
                Err(e) => Err(annotate(e)),
            }
        })
        .collect::<Result<Vec<ColumnOutput>>>()?;

    let mut matrix = FeatureMatrix::empty(pc.len());
    let mut dropped = Vec::new();
    let mut harmonic_csv = Vec::new();
    for out in columns {
        match out.column {
            Some(column) => {
                debug_assert!(column.iter().all(|v| (0.0..=1.0).contains(v) && v.is_finite()));
                if let Some(dump) = out.dump {
                    harmonic_csv.push((matrix.n_features(), dump));
                }
                matrix.columns.push(column);
                matrix.meta.push(out.meta);
            }
            None => {
                log::warn!(
                    "dropping feature (dim {}, birth {:.6}, death {:.6}): harmonic representative is zero",
                    out.meta.dim,
                    out.meta.birth,
                    out.meta.death
                );
                dropped.push(out.meta);
            }
        }
    }

    Ok(TopfResult {
        matrix,
        cuts: selected.cuts,
        dropped,
        harmonic_csv,
    })
}

/// Formats the selected-feature report line used by the CLI logs.
pub fn describe_meta(meta: &FeatureMeta) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "dim {} birth {:.6} death {:.6} lifetime {:.6} t {:.6}{}",
        meta.dim,
        meta.birth,
        meta.death,
        meta.death - meta.birth,
        meta.snapshot_t,
        if meta.essential { " (essential)" } else { "" }
    );
    s
}
