//! Filtered simplicial complexes: construction (Vietoris–Rips, alpha),
//! sublevel snapshots, and signed boundary matrices.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Result, TopfError};

mod alpha;
mod delaunay;
mod geometry;
mod vr;

pub use alpha::build_alpha_filtration;
pub use delaunay::delaunay;
pub use geometry::{circumradius, circumsphere};
pub use vr::{build_vr_filtration, DEFAULT_SIMPLEX_BUDGET};

/// An abstract simplex: strictly increasing vertex indices. The vertex order
/// fixes the canonical orientation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    verts: Vec<u32>,
}

impl Simplex {
    /// Sorts the vertices; panics on duplicates (a simplex is a set).
    pub fn new(mut verts: Vec<u32>) -> Simplex {
        verts.sort_unstable();
        assert!(
            verts.windows(2).all(|w| w[0] < w[1]),
            "simplex vertices must be distinct: {verts:?}"
        );
        Simplex { verts }
    }

    pub fn vertex(v: u32) -> Simplex {
        Simplex { verts: vec![v] }
    }

    pub fn dim(&self) -> usize {
        self.verts.len() - 1
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts
    }

    /// The face omitting the `i`-th smallest vertex.
    pub fn face(&self, i: usize) -> Simplex {
        let mut verts = self.verts.clone();
        verts.remove(i);
        Simplex { verts }
    }

    /// Faces in the order of the omitted vertex index; the `i`-th face
    /// carries the boundary sign (−1)^i.
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.verts.len()).map(|i| self.face(i))
    }
}

/// A simplex together with its filtration value.
#[derive(Clone, Debug)]
pub struct FilteredSimplex {
    pub simplex: Simplex,
    pub value: f64,
}

/// A finite filtration: simplices with nonnegative values, downward closed,
/// monotone, totally ordered by (value, dim, lexicographic vertices).
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    simplices: Vec<FilteredSimplex>,
    index: HashMap<Simplex, usize>,
    n_points: usize,
    max_dim_built: usize,
}

impl FilteredComplex {
    /// Sorts, indexes and validates the filtration invariants (downward
    /// closure and monotonicity).
    pub fn from_simplices(
        mut simplices: Vec<FilteredSimplex>,
        n_points: usize,
        max_dim_built: usize,
    ) -> Result<FilteredComplex> {
        simplices.sort_unstable_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then_with(|| a.simplex.dim().cmp(&b.simplex.dim()))
                .then_with(|| a.simplex.cmp(&b.simplex))
        });
        let mut index = HashMap::with_capacity(simplices.len());
        for (i, fs) in simplices.iter().enumerate() {
            if !fs.value.is_finite() || fs.value < 0.0 {
                return Err(TopfError::Degenerate(format!(
                    "filtration value {} for simplex {:?}",
                    fs.value,
                    fs.simplex.vertices()
                )));
            }
            if index.insert(fs.simplex.clone(), i).is_some() {
                return Err(TopfError::Degenerate(format!(
                    "duplicate simplex {:?}",
                    fs.simplex.vertices()
                )));
            }
        }
        let fc = FilteredComplex {
            simplices,
            index,
            n_points,
            max_dim_built,
        };
        fc.validate()?;
        Ok(fc)
    }

    fn validate(&self) -> Result<()> {
        for fs in &self.simplices {
            if fs.simplex.dim() == 0 {
                continue;
            }
            for face in fs.simplex.faces() {
                match self.index.get(&face) {
                    None => {
                        return Err(TopfError::Degenerate(format!(
                            "missing face {:?} of {:?}",
                            face.vertices(),
                            fs.simplex.vertices()
                        )))
                    }
                    Some(&fi) => {
                        if self.simplices[fi].value > fs.value {
                            return Err(TopfError::Degenerate(format!(
                                "filtration not monotone: face {:?} at {} above {:?} at {}",
                                face.vertices(),
                                self.simplices[fi].value,
                                fs.simplex.vertices(),
                                fs.value
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Highest simplex dimension this construction can contain (some
    /// dimensions may be empty).
    pub fn max_dim_built(&self) -> usize {
        self.max_dim_built
    }

    /// Simplices in filtration order.
    pub fn iter(&self) -> impl Iterator<Item = &FilteredSimplex> {
        self.simplices.iter()
    }

    pub fn get(&self, i: usize) -> &FilteredSimplex {
        &self.simplices[i]
    }

    pub fn position(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Largest filtration value in the complex.
    pub fn max_value(&self) -> f64 {
        self.simplices.last().map_or(0.0, |fs| fs.value)
    }

    /// The sublevel complex at threshold `t`.
    pub fn snapshot(&self, t: f64) -> SnapshotComplex {
        let mut dims: Vec<SnapshotDim> = (0..=self.max_dim_built)
            .map(|_| SnapshotDim::default())
            .collect();
        for (pos, fs) in self.simplices.iter().enumerate() {
            if fs.value <= t {
                let d = &mut dims[fs.simplex.dim()];
                d.index.insert(fs.simplex.clone(), d.simplices.len());
                d.simplices.push(fs.simplex.clone());
                d.parent_index.push(pos);
                d.values.push(fs.value);
            }
        }
        SnapshotComplex {
            threshold: t,
            n_points: self.n_points,
            dims,
        }
    }

    /// Text dump, one simplex per line: "v0 v1 ... vk : value".
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for fs in &self.simplices {
            let mut first = true;
            for v in fs.simplex.vertices() {
                if !first {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
                first = false;
            }
            let _ = writeln!(out, " : {}", fs.value);
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
struct SnapshotDim {
    simplices: Vec<Simplex>,
    parent_index: Vec<usize>,
    values: Vec<f64>,
    index: HashMap<Simplex, usize>,
}

/// A sublevel-set complex with dense per-dimension indices, ordered by the
/// parent filtration order.
#[derive(Clone, Debug)]
pub struct SnapshotComplex {
    threshold: f64,
    n_points: usize,
    dims: Vec<SnapshotDim>,
}

impl SnapshotComplex {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Structural bound on simplex dimension (inherited from the parent).
    pub fn max_dim(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn n_simplices(&self, k: usize) -> usize {
        self.dims.get(k).map_or(0, |d| d.simplices.len())
    }

    pub fn total_simplices(&self) -> usize {
        self.dims.iter().map(|d| d.simplices.len()).sum()
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.dims.get(k).map_or(&[], |d| &d.simplices)
    }

    /// Filtration values of the `k`-simplices, aligned with `simplices(k)`.
    pub fn values(&self, k: usize) -> &[f64] {
        self.dims.get(k).map_or(&[], |d| &d.values)
    }

    /// Position of each `k`-simplex in the parent filtration order.
    pub fn parent_indices(&self, k: usize) -> &[usize] {
        self.dims.get(k).map_or(&[], |d| &d.parent_index)
    }

    pub fn local_index(&self, s: &Simplex) -> Option<usize> {
        self.dims.get(s.dim()).and_then(|d| d.index.get(s).copied())
    }

    /// The signed incidence matrix from (k+1)-chains to k-chains.
    ///
    /// Column j holds the boundary of the j-th (k+1)-simplex; the face
    /// omitting the i-th smallest vertex carries sign (−1)^i.
    pub fn boundary_matrix(&self, k: usize) -> Result<BoundaryMatrix> {
        if k > self.max_dim() {
            return Err(TopfError::DimensionOutOfRange {
                dim: k,
                max_dim: self.max_dim(),
            });
        }
        let rows = self.n_simplices(k);
        let cofaces = self.simplices(k + 1);
        let mut col_ptr = Vec::with_capacity(cofaces.len() + 1);
        let mut row_idx = Vec::with_capacity(cofaces.len() * (k + 2));
        let mut signs = Vec::with_capacity(cofaces.len() * (k + 2));
        col_ptr.push(0u32);
        for coface in cofaces {
            let mut sign = 1i8;
            for face in coface.faces() {
                let r = self.local_index(&face).expect("downward closure");
                row_idx.push(r as u32);
                signs.push(sign);
                sign = -sign;
            }
            col_ptr.push(row_idx.len() as u32);
        }
        Ok(BoundaryMatrix {
            rows,
            cols: cofaces.len(),
            col_ptr,
            row_idx,
            signs,
        })
    }
}

/// Sparse signed boundary matrix in compressed-column layout.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<u32>,
    row_idx: Vec<u32>,
    signs: Vec<i8>,
}

impl BoundaryMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let lo = self.col_ptr[j] as usize;
        let hi = self.col_ptr[j + 1] as usize;
        self.row_idx[lo..hi]
            .iter()
            .zip(&self.signs[lo..hi])
            .map(|(&r, &s)| (r as usize, s))
    }

    /// y = B x, mapping (k+1)-chains to k-chains.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        y.fill(0.0);
        for j in 0..self.cols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for (r, s) in self.col(j) {
                y[r] += s as f64 * xj;
            }
        }
    }

    /// x = Bᵀ y, mapping k-chains to (k+1)-chains.
    pub fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for j in 0..self.cols {
            let mut acc = 0.0;
            for (r, s) in self.col(j) {
                acc += s as f64 * y[r];
            }
            x[j] = acc;
        }
    }

    /// Number of cofaces per row simplex (row sums of |B|).
    pub fn cofacet_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.rows];
        for &r in &self.row_idx {
            counts[r as usize] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled_triangle() -> FilteredComplex {
        let mut simplices = vec![];
        for v in 0..3u32 {
            simplices.push(FilteredSimplex {
                simplex: Simplex::vertex(v),
                value: 0.0,
            });
        }
        for (a, b, v) in [(0u32, 1u32, 1.0), (0, 2, 1.0), (1, 2, 1.0)] {
            simplices.push(FilteredSimplex {
                simplex: Simplex::new(vec![a, b]),
                value: v,
            });
        }
        simplices.push(FilteredSimplex {
            simplex: Simplex::new(vec![0, 1, 2]),
            value: 2.0,
        });
        FilteredComplex::from_simplices(simplices, 3, 2).unwrap()
    }

    #[test]
    fn boundary_of_triangle_has_alternating_signs() {
        // d[abc] = [bc] - [ac] + [ab]
        let fc = filled_triangle();
        let sc = fc.snapshot(f64::INFINITY);
        let b1 = sc.boundary_matrix(1).unwrap();
        assert_eq!(b1.rows(), 3);
        assert_eq!(b1.cols(), 1);
        let entries: Vec<(usize, i8)> = b1.col(0).collect();
        let bc = sc.local_index(&Simplex::new(vec![1, 2])).unwrap();
        let ac = sc.local_index(&Simplex::new(vec![0, 2])).unwrap();
        let ab = sc.local_index(&Simplex::new(vec![0, 1])).unwrap();
        assert_eq!(entries, vec![(bc, 1), (ac, -1), (ab, 1)]);
    }

    #[test]
    fn boundary_of_edge() {
        // d[ab] = [b] - [a]
        let fc = filled_triangle();
        let sc = fc.snapshot(f64::INFINITY);
        let b0 = sc.boundary_matrix(0).unwrap();
        let col: Vec<(usize, i8)> = b0.col(0).collect();
        assert_eq!(col, vec![(1, 1), (0, -1)]);
    }

    #[test]
    fn snapshot_thresholding() {
        let fc = filled_triangle();
        assert_eq!(fc.snapshot(0.5).total_simplices(), 3); // vertices only
        assert_eq!(fc.snapshot(1.0).total_simplices(), 6);
        assert_eq!(fc.snapshot(f64::INFINITY).total_simplices(), 7);
    }

    #[test]
    fn boundary_composition_vanishes() {
        let fc = filled_triangle();
        let sc = fc.snapshot(f64::INFINITY);
        let b0 = sc.boundary_matrix(0).unwrap();
        let b1 = sc.boundary_matrix(1).unwrap();
        // Integer composition B0 * B1 must be exactly zero.
        for j in 0..b1.cols() {
            let mut chain = vec![0i64; b1.rows()];
            for (r, s) in b1.col(j) {
                chain[r] += s as i64;
            }
            let mut out = vec![0i64; b0.rows()];
            for (e, &c) in chain.iter().enumerate() {
                if c != 0 {
                    for (v, s) in b0.col(e) {
                        out[v] += s as i64 * c;
                    }
                }
            }
            assert!(out.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn rejects_missing_face() {
        let simplices = vec![
            FilteredSimplex {
                simplex: Simplex::vertex(0),
                value: 0.0,
            },
            FilteredSimplex {
                simplex: Simplex::new(vec![0, 1]),
                value: 1.0,
            },
        ];
        assert!(FilteredComplex::from_simplices(simplices, 2, 1).is_err());
    }

    #[test]
    fn rejects_non_monotone() {
        let mut simplices = vec![];
        for v in 0..2u32 {
            simplices.push(FilteredSimplex {
                simplex: Simplex::vertex(v),
                value: 2.0,
            });
        }
        simplices.push(FilteredSimplex {
            simplex: Simplex::new(vec![0, 1]),
            value: 1.0,
        });
        assert!(FilteredComplex::from_simplices(simplices, 2, 1).is_err());
    }

    #[test]
    fn dump_format() {
        let fc = filled_triangle();
        let dump = fc.dump();
        assert!(dump.lines().any(|l| l == "0 1 2 : 2"));
        assert_eq!(dump.lines().count(), 7);
    }
}
