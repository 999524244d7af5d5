//! Selection of significant homology classes by the drop-off-quotient
//! heuristic, with its guard parameters.

use crate::complex::Simplex;
use crate::error::{Result, TopfError};
use crate::f3::F3;
use crate::persistence::PersistenceDiagram;

/// Knobs of the drop-off heuristic. Defaults follow the reference
/// hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct SelectionParams {
    /// Bias toward selecting more features; 0 reduces the quotient to the
    /// plain lifetime ratio.
    pub beta: f64,
    /// Quotients at or below this value are always acceptable cut points.
    pub min_rel_quot: f64,
    /// A dimension whose best cut is more than this factor weaker than the
    /// strongest dimension's cut is dropped entirely.
    pub max_total_quot: f64,
    /// Dimension-0 classes must be at least this factor more persistent
    /// than the least persistent selected higher-dimensional class.
    pub min_0_ratio: f64,
}

impl Default for SelectionParams {
    fn default() -> SelectionParams {
        SelectionParams {
            beta: 0.0,
            min_rel_quot: 0.1,
            max_total_quot: 10.0,
            min_0_ratio: 5.0,
        }
    }
}

impl SelectionParams {
    fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) {
            return Err(TopfError::InvalidParameter(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        for (name, v) in [
            ("min_rel_quot", self.min_rel_quot),
            ("max_total_quot", self.max_total_quot),
            ("min_0_ratio", self.min_0_ratio),
        ] {
            if !(v > 0.0) {
                return Err(TopfError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One selected homology class.
#[derive(Clone, Debug)]
pub struct SelectedFeature {
    pub dim: usize,
    /// Persistence rank within the dimension (0 = most persistent).
    pub rank: usize,
    pub birth: f64,
    /// Finite death; essential classes carry the maximum filtration value.
    pub death: f64,
    pub lifetime: f64,
    pub essential: bool,
    pub generator: Vec<(Simplex, F3)>,
}

/// Per-dimension cut diagnostics for reporting.
#[derive(Clone, Copy, Debug)]
pub struct DimCut {
    pub dim: usize,
    /// Number of classes selected before cross-dimension guards.
    pub n_selected: usize,
    /// Quotient at the chosen cut; `None` when only one candidate existed.
    pub cut_quotient: Option<f64>,
    /// Whether the max_total_quot guard dropped this dimension.
    pub vetoed: bool,
}

/// The selected classes, ordered by dimension then persistence rank;
/// lifetimes are non-increasing within each dimension.
#[derive(Clone, Debug, Default)]
pub struct FeatureSet {
    pub features: Vec<SelectedFeature>,
    pub cuts: Vec<DimCut>,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Importance-drop-off quotients q_i = (l_{i+1}/l_i) * (1 + beta/i) for the
/// non-increasing lifetimes l, 1-indexed.
fn quotients(lifetimes: &[f64], beta: f64) -> Vec<f64> {
    lifetimes
        .windows(2)
        .enumerate()
        .map(|(idx, w)| {
            let i = (idx + 1) as f64;
            w[1] / w[0] * (1.0 + beta / i)
        })
        .collect()
}

/// The cut index (number of classes kept). Quotients are floored at
/// `min_rel_quot` — a drop at or below the floor is already decisive — and
/// the earliest minimum wins. This keeps the cut at the first deep drop
/// instead of chasing ever-deeper ratios inside the noise tail (long
/// plateaus of near-identical small classes otherwise pull the cut
/// arbitrarily far down). Without any drop at the floor this reduces to the
/// plain argmin of the quotients.
fn cut_index(qs: &[f64], min_rel_quot: f64) -> (usize, f64) {
    let floored = |i: usize| qs[i].max(min_rel_quot);
    let candidate = (0..qs.len())
        .min_by(|&a, &b| floored(a).total_cmp(&floored(b)).then(a.cmp(&b)))
        .expect("at least one quotient");
    (candidate + 1, floored(candidate))
}

/// Selects the significant classes of `diag` in the requested dimensions.
///
/// Zero-persistence pairs are discarded; essential deaths are replaced by
/// the maximum filtration value. A diagram with no positive-persistence
/// class in any requested dimension yields an empty set (not an error).
pub fn select_features(
    diag: &PersistenceDiagram,
    params: &SelectionParams,
    dims: &[usize],
) -> Result<FeatureSet> {
    params.validate()?;
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();

    struct DimSelection {
        dim: usize,
        features: Vec<SelectedFeature>,
        cut_quotient: Option<f64>,
    }

    let mut per_dim: Vec<DimSelection> = Vec::new();
    for &dim in &dims {
        let mut classes: Vec<SelectedFeature> = diag
            .pairs_in_dim(dim)
            .filter_map(|p| {
                let essential = p.is_essential();
                let death = if essential {
                    diag.essential_death_proxy
                } else {
                    p.death
                };
                let lifetime = death - p.birth;
                // Relative cutoff: classes whose persistence is at rounding
                // scale are zero-persistence pairs in exact arithmetic.
                (lifetime > 1e-9 * death.abs()).then(|| SelectedFeature {
                    dim,
                    rank: 0,
                    birth: p.birth,
                    death,
                    lifetime,
                    essential,
                    generator: p.generator.clone(),
                })
            })
            .collect();
        classes.sort_by(|a, b| {
            b.lifetime
                .total_cmp(&a.lifetime)
                .then_with(|| a.birth.total_cmp(&b.birth))
        });
        for (rank, c) in classes.iter_mut().enumerate() {
            c.rank = rank;
        }
        if classes.is_empty() {
            continue;
        }
        let (n, cut) = if classes.len() == 1 {
            (1, None)
        } else {
            let lifetimes: Vec<f64> = classes.iter().map(|c| c.lifetime).collect();
            let (n, q) = cut_index(&quotients(&lifetimes, params.beta), params.min_rel_quot);
            (n, Some(q))
        };
        classes.truncate(n);
        per_dim.push(DimSelection {
            dim,
            features: classes,
            cut_quotient: cut,
        });
    }

    // Cross-dimension guard: drop dimensions whose cut is more than
    // max_total_quot weaker than the strongest cut.
    let strongest = per_dim
        .iter()
        .filter_map(|d| d.cut_quotient)
        .min_by(f64::total_cmp);
    let vetoed: Vec<bool> = per_dim
        .iter()
        .map(|d| match (d.cut_quotient, strongest) {
            (Some(q), Some(best)) => q > params.max_total_quot * best,
            _ => false,
        })
        .collect();

    // Dimension-0 guard: compare against the weakest selected
    // higher-dimensional lifetime.
    let min_higher = per_dim
        .iter()
        .zip(&vetoed)
        .filter(|(d, &v)| d.dim >= 1 && !v)
        .flat_map(|(d, _)| d.features.iter().map(|f| f.lifetime))
        .min_by(f64::total_cmp);
    if let Some(min_higher) = min_higher {
        for (d, v) in per_dim.iter_mut().zip(&vetoed) {
            if d.dim == 0 && !v {
                d.features
                    .retain(|f| f.lifetime >= params.min_0_ratio * min_higher);
            }
        }
    }

    let mut out = FeatureSet::default();
    for (i, d) in per_dim.iter().enumerate() {
        out.cuts.push(DimCut {
            dim: d.dim,
            n_selected: if vetoed[i] { 0 } else { d.features.len() },
            cut_quotient: d.cut_quotient,
            vetoed: vetoed[i],
        });
        if !vetoed[i] {
            out.features.extend(d.features.iter().cloned());
        }
    }
    Ok(out)
}
