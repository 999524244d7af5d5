//! Embedding of field generators as real chains, simplicial weights, and
//! projection onto the (weighted) harmonic space via two sparse
//! least-squares solves.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::complex::{BoundaryMatrix, Simplex, SnapshotComplex};
use crate::error::{Result, TopfError};
use crate::f3::F3;
use crate::solver::{lsmr, LinearOperator};

/// Snapshot step for a class alive on [birth, death]: the geometric mean
/// `birth^(1-lambda) * death^lambda` for k >= 1 and `lambda * death` for
/// k = 0. With `linear` set, k >= 1 uses `lambda*birth + (1-lambda)*death`
/// instead.
///
/// A birth of exactly 0 with k >= 1 cannot arise from distance-based
/// filtrations; it falls back to `lambda * death`.
pub fn interpolation_time(
    birth: f64,
    death: f64,
    k: usize,
    lambda: f64,
    linear: bool,
) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(TopfError::InvalidParameter(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    if !(birth >= 0.0 && death >= birth && death.is_finite()) {
        return Err(TopfError::InvalidParameter(format!(
            "need 0 <= birth <= death < inf, got birth {birth}, death {death}"
        )));
    }
    if !(death > 0.0) {
        return Err(TopfError::InvalidParameter(format!(
            "death must be positive, got {death}"
        )));
    }
    let t = if k == 0 || birth == 0.0 {
        lambda * death
    } else if linear {
        lambda * birth + (1.0 - lambda) * death
    } else {
        birth.powf(1.0 - lambda) * death.powf(lambda)
    };
    Ok(if k >= 1 { t.clamp(birth, death) } else { t })
}

/// Weighting of the k-simplices before the harmonic projection.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    Unweighted,
    /// 1 / (cofacet count + 1)^2; cheap proxy for effective resistance.
    Triangle,
    /// Squared diagonal of the projector onto the row space of B_{k-1};
    /// dense pseudoinverse, gated by a size budget.
    EffectiveResistance,
}

/// Default cap on k-simplices for the effective-resistance pseudoinverse.
pub const DEFAULT_EFFRES_BUDGET: usize = 5000;

/// Per-k-simplex positive weights under the given scheme.
pub fn simplicial_weights(
    sc: &SnapshotComplex,
    k: usize,
    scheme: WeightScheme,
    effres_budget: usize,
) -> Result<Vec<f64>> {
    let n_k = sc.n_simplices(k);
    match scheme {
        WeightScheme::Unweighted => Ok(vec![1.0; n_k]),
        WeightScheme::Triangle => {
            let counts = sc.boundary_matrix(k)?.cofacet_counts();
            Ok(counts
                .iter()
                .map(|&c| 1.0 / ((c + 1) * (c + 1)) as f64)
                .collect())
        }
        WeightScheme::EffectiveResistance => {
            if k == 0 {
                // B_{-1} is the zero map; the projector is zero. Uniform
                // weights keep the scheme usable for component features.
                return Ok(vec![1.0; n_k]);
            }
            if n_k > effres_budget {
                return Err(TopfError::InvalidParameter(format!(
                    "effective-resistance weights require a dense pseudoinverse: \
                     {n_k} simplices of dimension {k} exceed the budget {effres_budget}; \
                     use the triangle weight scheme instead"
                )));
            }
            let b = sc.boundary_matrix(k - 1)?;
            let mut dense = DMatrix::zeros(b.rows(), b.cols());
            for j in 0..b.cols() {
                for (r, s) in b.col(j) {
                    dense[(r, j)] = s as f64;
                }
            }
            let pinv = dense
                .clone()
                .pseudo_inverse(1e-10)
                .map_err(|e| TopfError::Other(format!("pseudoinverse failed: {e}")))?;
            let projector = pinv * dense;
            Ok((0..n_k)
                .map(|i| {
                    let d = projector[(i, i)];
                    (d * d).max(1e-12)
                })
                .collect())
        }
    }
}

/// A real-valued chain over the k-simplices of a snapshot.
#[derive(Clone, Debug)]
pub struct RealChain {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl RealChain {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Embeds an F3 generator into the real chain space of `sc`: coefficient 1
/// maps to +1, coefficient 2 to -1, absent simplices to 0.
pub fn embed_generator(
    generator: &[(Simplex, F3)],
    sc: &SnapshotComplex,
    k: usize,
) -> Result<RealChain> {
    let mut values = vec![0.0; sc.n_simplices(k)];
    for (simplex, coeff) in generator {
        if simplex.dim() != k {
            return Err(TopfError::Other(format!(
                "generator simplex {:?} has dimension {}, expected {k}",
                simplex.vertices(),
                simplex.dim()
            )));
        }
        let idx = sc.local_index(simplex).ok_or_else(|| {
            TopfError::Other(format!(
                "generator simplex {:?} missing from snapshot at t = {}",
                simplex.vertices(),
                sc.threshold()
            ))
        })?;
        values[idx] = coeff.to_real();
    }
    Ok(RealChain { dim: k, values })
}

/// W^{1/2} B_{k-1}^T as an operator from (k-1)-chains to k-chains.
struct WeightedCoboundary<'a> {
    boundary: &'a BoundaryMatrix,
    scale: &'a [f64],
}

impl LinearOperator for WeightedCoboundary<'_> {
    fn rows(&self) -> usize {
        self.boundary.cols()
    }

    fn cols(&self) -> usize {
        self.boundary.rows()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.boundary.apply_transpose(x, out);
        for (o, s) in out.iter_mut().zip(self.scale) {
            *o *= s;
        }
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = y.iter().zip(self.scale).map(|(v, s)| v * s).collect();
        self.boundary.apply(&scaled, out);
    }
}

/// W^{-1/2} B_k as an operator from (k+1)-chains to k-chains.
struct WeightedBoundary<'a> {
    boundary: &'a BoundaryMatrix,
    scale: &'a [f64],
}

impl LinearOperator for WeightedBoundary<'_> {
    fn rows(&self) -> usize {
        self.boundary.rows()
    }

    fn cols(&self) -> usize {
        self.boundary.cols()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.boundary.apply(x, out);
        for (o, s) in out.iter_mut().zip(self.scale) {
            *o *= s;
        }
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = y.iter().zip(self.scale).map(|(v, s)| v * s).collect();
        self.boundary.apply_transpose(&scaled, out);
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn subtract_component(op: &dyn LinearOperator, target: &mut [f64], iterations: &mut usize) {
    if op.cols() == 0 {
        return;
    }
    let cap = 10 * (op.rows() + op.cols());
    let res = lsmr(op, target, 1e-11, 1e-11, cap);
    *iterations += res.iterations;
    let mut component = vec![0.0; op.rows()];
    op.apply(&res.x, &mut component);
    for (t, c) in target.iter_mut().zip(&component) {
        *t -= c;
    }
}

/// Weighted residual norms of a candidate harmonic chain:
/// (||B_{k-1} W^{1/2} e||, ||B_k^T W^{-1/2} e||).
pub fn harmonic_residuals(
    e_hat: &RealChain,
    sc: &SnapshotComplex,
    weights: &[f64],
) -> Result<(f64, f64)> {
    let k = e_hat.dim;
    let w_sqrt: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let w_inv_sqrt: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let grad_residual = if k >= 1 {
        let b_down = sc.boundary_matrix(k - 1)?;
        let scaled: Vec<f64> = e_hat.values.iter().zip(&w_sqrt).map(|(v, s)| v * s).collect();
        let mut out = vec![0.0; b_down.rows()];
        b_down.apply(&scaled, &mut out);
        norm(&out)
    } else {
        0.0
    };
    let b_up = sc.boundary_matrix(k)?;
    let scaled: Vec<f64> = e_hat
        .values
        .iter()
        .zip(&w_inv_sqrt)
        .map(|(v, s)| v * s)
        .collect();
    let mut out = vec![0.0; b_up.cols()];
    b_up.apply_transpose(&scaled, &mut out);
    Ok((grad_residual, norm(&out)))
}

/// Projects the embedded chain onto the harmonic space of the snapshot.
///
/// The chain is first rescaled into the weighted inner product
/// (e_w = W^{-1/2} e); the gradient component along W^{1/2} B_{k-1}^T and
/// the curl component along W^{-1/2} B_k are then removed by least-squares
/// solves. The returned chain lives in the weighted inner product. Residuals
/// must contract below 1e-7 relative to the output norm, otherwise the
/// solver reports non-convergence (refinement passes square the contraction,
/// so this fires only on genuine breakdown).
pub fn harmonic_project(
    e: &RealChain,
    sc: &SnapshotComplex,
    weights: &[f64],
) -> Result<RealChain> {
    let k = e.dim;
    let n_k = sc.n_simplices(k);
    if e.values.len() != n_k || weights.len() != n_k {
        return Err(TopfError::Other(format!(
            "chain/weight length mismatch: {} values, {} weights, {} simplices",
            e.values.len(),
            weights.len(),
            n_k
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(TopfError::InvalidParameter(
            "weights must be strictly positive".into(),
        ));
    }
    let w_sqrt: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let w_inv_sqrt: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();

    let b_down = if k >= 1 {
        Some(sc.boundary_matrix(k - 1)?)
    } else {
        None
    };
    let b_up = sc.boundary_matrix(k)?;

    // e_w = W^{-1/2} e.
    let mut e_hat: Vec<f64> = e.values.iter().zip(&w_inv_sqrt).map(|(v, s)| v * s).collect();
    let input_norm = norm(&e_hat);
    let mut iterations = 0usize;

    let rel_tol = 1e-7;
    for _pass in 0..3 {
        if let Some(b) = &b_down {
            let grad_op = WeightedCoboundary {
                boundary: b,
                scale: &w_sqrt,
            };
            subtract_component(&grad_op, &mut e_hat, &mut iterations);
        }
        let curl_op = WeightedBoundary {
            boundary: &b_up,
            scale: &w_inv_sqrt,
        };
        subtract_component(&curl_op, &mut e_hat, &mut iterations);

        let out = RealChain {
            dim: k,
            values: e_hat.clone(),
        };
        let out_norm = norm(&e_hat);
        if out_norm <= 1e-12 * input_norm.max(f64::MIN_POSITIVE) {
            // Effectively zero: nothing harmonic survives. Callers treat the
            // all-zero chain as a degenerate feature.
            return Ok(out);
        }
        let (r_grad, r_curl) = harmonic_residuals(&out, sc, weights)?;
        if r_grad <= rel_tol * out_norm && r_curl <= rel_tol * out_norm {
            return Ok(out);
        }
    }

    let out_norm = norm(&e_hat);
    let chain = RealChain {
        dim: k,
        values: e_hat,
    };
    let (r_grad, r_curl) = harmonic_residuals(&chain, sc, weights)?;
    Err(TopfError::SolverNotConverged {
        iterations,
        boundary_residual: r_grad / out_norm.max(f64::MIN_POSITIVE),
        coboundary_residual: r_curl / out_norm.max(f64::MIN_POSITIVE),
    })
}

/// CSV dump of a chain: "v0 v1 ... vk, value" per simplex.
pub fn chain_to_csv(chain: &RealChain, sc: &SnapshotComplex) -> String {
    let mut out = String::new();
    for (simplex, value) in sc.simplices(chain.dim).iter().zip(&chain.values) {
        let verts: Vec<String> = simplex.vertices().iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{}, {}", verts.join(" "), value);
    }
    out
}
