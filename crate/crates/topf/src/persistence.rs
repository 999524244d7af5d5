//! Persistent homology over the three-element field, with a representative
//! cycle for every finite and essential class.
//!
//! Left-to-right column reduction of the boundary matrix in filtration
//! order, processed one dimension at a time from the top down so that paired
//! creator columns can be cleared before their own reduction. A destroyer
//! column's fully reduced boundary is a cycle supported in the snapshot at
//! the pair's birth and is stored as the class representative; essential
//! classes store the accumulated kernel chain instead.

use serde::Serialize;

use crate::complex::{FilteredComplex, Simplex, SnapshotComplex};
use crate::error::{Result, TopfError};
use crate::f3::F3;

/// A birth/death pair with its representative cycle (chain over the
/// k-simplices of the birth snapshot, coefficients in F3).
#[derive(Clone, Debug)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
    pub generator: Vec<(Simplex, F3)>,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn lifetime(&self) -> f64 {
        self.death - self.birth
    }
}

/// All pairs of a filtration, plus a finite stand-in for essential deaths
/// used by ranking and interpolation downstream. It defaults to the largest
/// filtration value; the feature pipeline overrides it with the point-cloud
/// diameter, which is robust against the huge circumradii of near-collinear
/// hull slivers in alpha filtrations.
#[derive(Clone, Debug)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    pub essential_death_proxy: f64,
}

impl PersistenceDiagram {
    pub fn pairs_in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// JSON serialization: an array of `{dim, birth, death, generator}` with
    /// `death: null` encoding an essential class and generators as
    /// `[[vertices], coefficient]` entries.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct PairOut<'a> {
            dim: usize,
            birth: f64,
            death: Option<f64>,
            generator: Vec<(&'a [u32], u8)>,
        }
        let out: Vec<PairOut> = self
            .pairs
            .iter()
            .map(|p| PairOut {
                dim: p.dim,
                birth: p.birth,
                death: (!p.is_essential()).then_some(p.death),
                generator: p
                    .generator
                    .iter()
                    .map(|(s, c)| (s.vertices(), c.value()))
                    .collect(),
            })
            .collect();
        serde_json::to_string_pretty(&out).expect("diagram serialization")
    }
}

/// Sparse F3 vector: entries sorted by index, no zeros.
type SparseVec = Vec<(u32, F3)>;

/// a -= factor * b, keeping the representation sorted and zero-free.
fn sub_scaled(a: &SparseVec, b: &SparseVec, factor: F3) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ia, ca)), Some(&(ib, cb))) => {
                if ia < ib {
                    out.push((ia, ca));
                    i += 1;
                } else if ib < ia {
                    let c = -(factor * cb);
                    if !c.is_zero() {
                        out.push((ib, c));
                    }
                    j += 1;
                } else {
                    let c = ca - factor * cb;
                    if !c.is_zero() {
                        out.push((ia, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
            (Some(&(ia, ca)), None) => {
                out.push((ia, ca));
                i += 1;
            }
            (None, Some(&(ib, cb))) => {
                let c = -(factor * cb);
                if !c.is_zero() {
                    out.push((ib, c));
                }
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Computes persistent homology in dimensions `0..=max_dim`.
///
/// Requires the filtration to have been built at least one dimension above
/// `max_dim` (the destroyer columns of top-dimensional classes).
pub fn compute_persistence(fc: &FilteredComplex, max_dim: usize) -> Result<PersistenceDiagram> {
    if max_dim + 1 > fc.max_dim_built() {
        return Err(TopfError::DimensionOutOfRange {
            dim: max_dim,
            max_dim: fc.max_dim_built().saturating_sub(1),
        });
    }
    let sc = fc.snapshot(f64::INFINITY);
    let mut pairs: Vec<PersistencePair> = Vec::new();
    // cleared[d]: d-simplices already paired as creators by the d+1 pass.
    let mut cleared: Vec<Vec<bool>> = (0..=max_dim + 1)
        .map(|d| vec![false; sc.n_simplices(d)])
        .collect();

    for d in (1..=max_dim + 1).rev() {
        let boundary = sc.boundary_matrix(d - 1)?;
        let track_kernel = d <= max_dim;
        let cols = boundary.cols();
        let mut pivot_owner: Vec<Option<usize>> = vec![None; boundary.rows()];
        let mut reduced: Vec<Option<SparseVec>> = vec![None; cols];
        let mut kernel: Vec<Option<SparseVec>> = vec![None; cols];

        for j in 0..cols {
            if cleared[d][j] {
                continue;
            }
            let mut col: SparseVec = boundary
                .col(j)
                .map(|(r, s)| (r as u32, F3::from_signed(s as i64)))
                .collect();
            col.sort_unstable_by_key(|&(r, _)| r);
            let mut v: SparseVec = vec![(j as u32, F3::ONE)];

            while let Some(&(r, c)) = col.last() {
                let Some(owner) = pivot_owner[r as usize] else {
                    break;
                };
                let other = reduced[owner].as_ref().expect("owner stores its column");
                let factor = c * other.last().expect("pivot column nonzero").1.inv();
                col = sub_scaled(&col, other, factor);
                if track_kernel {
                    if let Some(vo) = kernel[owner].as_ref() {
                        v = sub_scaled(&v, vo, factor);
                    }
                }
            }

            if let Some(&(r, _)) = col.last() {
                // Pair (r, j): the class born with the r-th (d-1)-simplex
                // dies when the j-th d-simplex enters.
                let birth = sc.values(d - 1)[r as usize];
                let death = sc.values(d)[j];
                let generator = col
                    .iter()
                    .map(|&(i, c)| (sc.simplices(d - 1)[i as usize].clone(), c))
                    .collect();
                pairs.push(PersistencePair {
                    dim: d - 1,
                    birth,
                    death,
                    generator,
                });
                cleared[d - 1][r as usize] = true;
                pivot_owner[r as usize] = Some(j);
                reduced[j] = Some(col);
                if track_kernel {
                    kernel[j] = Some(v);
                }
            } else if track_kernel {
                // The column vanished: the d-simplex creates a class, and no
                // later pass can pair it (higher dimensions already ran), so
                // it is essential. The accumulated kernel chain is a cycle.
                let birth = sc.values(d)[j];
                let generator = v
                    .iter()
                    .map(|&(i, c)| (sc.simplices(d)[i as usize].clone(), c))
                    .collect();
                pairs.push(PersistencePair {
                    dim: d,
                    birth,
                    death: f64::INFINITY,
                    generator,
                });
            }
        }
    }

    // Dimension 0: every vertex is a creator; the unpaired ones are the
    // essential class of each connected component.
    for (j, simplex) in sc.simplices(0).iter().enumerate() {
        if !cleared[0][j] {
            pairs.push(PersistencePair {
                dim: 0,
                birth: sc.values(0)[j],
                death: f64::INFINITY,
                generator: vec![(simplex.clone(), F3::ONE)],
            });
        }
    }

    pairs.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then_with(|| a.birth.total_cmp(&b.birth))
            .then_with(|| a.death.total_cmp(&b.death))
            .then_with(|| a.generator.len().cmp(&b.generator.len()))
    });
    Ok(PersistenceDiagram {
        pairs,
        essential_death_proxy: fc.max_value(),
    })
}

/// Rank of a boundary matrix over F3 by plain column reduction.
fn f3_rank(boundary: &crate::complex::BoundaryMatrix) -> usize {
    let mut pivot_owner: Vec<Option<usize>> = vec![None; boundary.rows()];
    let mut reduced: Vec<SparseVec> = Vec::new();
    let mut rank = 0;
    for j in 0..boundary.cols() {
        let mut col: SparseVec = boundary
            .col(j)
            .map(|(r, s)| (r as u32, F3::from_signed(s as i64)))
            .collect();
        col.sort_unstable_by_key(|&(r, _)| r);
        while let Some(&(r, c)) = col.last() {
            let Some(owner) = pivot_owner[r as usize] else {
                break;
            };
            let other = &reduced[owner];
            let factor = c * other.last().unwrap().1.inv();
            col = sub_scaled(&col, other, factor);
        }
        if let Some(&(r, _)) = col.last() {
            pivot_owner[r as usize] = Some(reduced.len());
            reduced.push(col);
            rank += 1;
        }
    }
    rank
}

/// Betti numbers of a snapshot over F3, one per dimension `0..=max_dim`:
/// `betti_k = n_k - rank B_{k-1} - rank B_k` (with `B_{-1} = 0`). Used as an
/// independent oracle for the persistence computation.
pub fn betti_numbers(sc: &SnapshotComplex, max_dim: usize) -> Result<Vec<usize>> {
    let mut betti = Vec::with_capacity(max_dim + 1);
    let mut rank_below = 0usize; // rank of B_{k-1}
    for k in 0..=max_dim {
        let n_k = sc.n_simplices(k);
        let rank_k = if k < sc.max_dim() {
            f3_rank(&sc.boundary_matrix(k)?)
        } else {
            0
        };
        betti.push(n_k - rank_below - rank_k);
        rank_below = rank_k;
    }
    Ok(betti)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{
        build_alpha_filtration, build_vr_filtration, FilteredComplex, DEFAULT_SIMPLEX_BUDGET,
    };
    use crate::pointcloud::PointCloud;

    fn vr(points: Vec<Vec<f64>>, max_dim: usize) -> FilteredComplex {
        let pc = PointCloud::new(points, None).unwrap();
        build_vr_filtration(&pc, max_dim, None, DEFAULT_SIMPLEX_BUDGET).unwrap()
    }

    #[test]
    fn unit_square_has_one_h1_pair() {
        let fc = vr(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
            1,
        );
        let diag = compute_persistence(&fc, 1).unwrap();
        let h1: Vec<&PersistencePair> = diag
            .pairs_in_dim(1)
            .filter(|p| p.lifetime() > 1e-12)
            .collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 1.0).abs() < 1e-12);
        assert!((h1[0].death - 2.0f64.sqrt()).abs() < 1e-12);
        // The generator is a 4-edge cycle at birth.
        assert_eq!(h1[0].generator.len(), 4);
    }

    #[test]
    fn two_distant_points_h0() {
        let fc = vr(vec![vec![0.0, 0.0], vec![3.0, 0.0]], 0);
        let diag = compute_persistence(&fc, 0).unwrap();
        let mut h0: Vec<(f64, f64)> = diag.pairs_in_dim(0).map(|p| (p.birth, p.death)).collect();
        h0.sort_by(|a, b| a.1.total_cmp(&b.1));
        assert_eq!(h0.len(), 2);
        assert_eq!(h0[0], (0.0, 3.0));
        assert!(h0[1].1.is_infinite());
    }

    #[test]
    fn generators_are_cycles_at_birth() {
        let mut points = Vec::new();
        let mut rng_state = 12345u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 33) as f64 / (1u64 << 31) as f64
        };
        for _ in 0..25 {
            points.push(vec![next() * 2.0, next() * 2.0]);
        }
        let fc = vr(points, 1);
        let diag = compute_persistence(&fc, 1).unwrap();
        for pair in &diag.pairs {
            if pair.dim == 0 {
                continue;
            }
            // Boundary of the generator over F3 must vanish, and every
            // simplex must be present at birth.
            let mut boundary_sum: std::collections::HashMap<Simplex, F3> =
                std::collections::HashMap::new();
            for (simplex, coeff) in &pair.generator {
                let pos = fc.position(simplex).unwrap();
                assert!(fc.get(pos).value <= pair.birth + 1e-12);
                let mut sign = F3::ONE;
                for face in simplex.faces() {
                    let entry = boundary_sum.entry(face).or_insert(F3::ZERO);
                    *entry = *entry + sign * *coeff;
                    sign = -sign;
                }
            }
            assert!(
                boundary_sum.values().all(|c| c.is_zero()),
                "generator of ({}, {}) is not a cycle",
                pair.birth,
                pair.death
            );
        }
    }

    #[test]
    fn betti_hand_cases() {
        // Hollow triangle: a circle.
        let fc = vr(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.8]], 0);
        let sc = fc.snapshot(f64::INFINITY);
        assert_eq!(betti_numbers(&sc, 1).unwrap(), vec![1, 1]);

        // Filled triangle: a disk.
        let fc = vr(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.8]], 1);
        let sc = fc.snapshot(f64::INFINITY);
        assert_eq!(betti_numbers(&sc, 1).unwrap(), vec![1, 0]);
    }

    #[test]
    fn betti_two_disjoint_hollow_squares() {
        let offset = 10.0;
        let mut points = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        for i in 0..4 {
            let p = points[i].clone();
            points.push(vec![p[0] + offset, p[1]]);
        }
        let pc = PointCloud::new(points, None).unwrap();
        // Radius cutoff keeps the squares hollow (diagonals excluded).
        let fc = build_vr_filtration(&pc, 1, Some(1.2), DEFAULT_SIMPLEX_BUDGET).unwrap();
        let sc = fc.snapshot(f64::INFINITY);
        assert_eq!(betti_numbers(&sc, 1).unwrap(), vec![2, 2]);
    }

    #[test]
    fn icosahedron_alpha_betti_profile() {
        // Betti (1, 0, 1) after all faces enter and before the interior
        // fills: a hollow surface.
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let mut points = Vec::new();
        for &s1 in &[1.0, -1.0] {
            for &s2 in &[1.0, -1.0] {
                points.push(vec![0.0, s1, s2 * phi]);
                points.push(vec![s1, s2 * phi, 0.0]);
                points.push(vec![s2 * phi, 0.0, s1]);
            }
        }
        let pc = PointCloud::new(points, None).unwrap();
        let fc = build_alpha_filtration(&pc, 2).unwrap();
        // Edge length 2, face circumradius 2/sqrt(3), vertex radius ~1.902.
        let t = 1.4;
        let sc = fc.snapshot(t);
        assert_eq!(betti_numbers(&sc, 2).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn requires_one_extra_dimension() {
        let fc = vr(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.8]], 1);
        // Filtration built to simplex dimension 2 supports max_dim 1 only.
        assert!(compute_persistence(&fc, 2).is_err());
        assert!(compute_persistence(&fc, 1).is_ok());
    }
}
