//! Vietoris–Rips filtration by clique expansion of the distance graph.

use crate::error::{Result, TopfError};
use crate::pointcloud::PointCloud;

use super::{FilteredComplex, FilteredSimplex, Simplex};

/// Default cap on the total number of simplices a construction may emit.
pub const DEFAULT_SIMPLEX_BUDGET: usize = 2_000_000;

/// Builds the Vietoris–Rips filtration up to simplex dimension
/// `max_dim + 1` (one above the requested homology dimension).
///
/// A simplex enters at the largest pairwise distance among its vertices;
/// `max_radius` drops all simplices with a larger value. Duplicate points
/// are allowed (distance zero). Exceeding `budget` simplices is an error.
pub fn build_vr_filtration(
    pc: &PointCloud,
    max_dim: usize,
    max_radius: Option<f64>,
    budget: usize,
) -> Result<FilteredComplex> {
    if let Some(r) = max_radius {
        if !(r > 0.0) {
            return Err(TopfError::InvalidParameter(format!(
                "max_radius must be positive, got {r}"
            )));
        }
    }
    if pc.is_empty() {
        return Err(TopfError::EmptyInput);
    }
    let n = pc.len();
    let top_dim = max_dim + 1;
    let cutoff = max_radius.unwrap_or(f64::INFINITY);

    // Upper-neighbor adjacency with distances, sorted by vertex index.
    let mut upper: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pc.distance(i, j);
            if d <= cutoff {
                upper[i].push((j as u32, d));
            }
        }
    }

    let mut simplices: Vec<FilteredSimplex> = Vec::new();
    let check_budget = |len: usize| -> Result<()> {
        if len > budget {
            Err(TopfError::BudgetExceeded {
                count: len,
                budget,
            })
        } else {
            Ok(())
        }
    };

    for v in 0..n as u32 {
        simplices.push(FilteredSimplex {
            simplex: Simplex::vertex(v),
            value: 0.0,
        });
    }
    check_budget(simplices.len())?;

    if top_dim == 0 {
        return FilteredComplex::from_simplices(simplices, n, 0);
    }

    // Expand dimension by dimension: a (k+1)-simplex is a k-simplex plus a
    // common upper neighbor; its value is the max of the face value and the
    // distances to the new vertex.
    let dist = |a: u32, b: u32| -> f64 {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        match upper[lo as usize].binary_search_by(|&(v, _)| v.cmp(&hi)) {
            Ok(pos) => upper[lo as usize][pos].1,
            Err(_) => f64::INFINITY,
        }
    };

    // Current frontier: (vertices, value), starting from single vertices.
    let mut frontier: Vec<(Vec<u32>, f64)> = (0..n as u32).map(|v| (vec![v], 0.0)).collect();
    for _dim in 1..=top_dim {
        let mut next: Vec<(Vec<u32>, f64)> = Vec::new();
        for (verts, value) in &frontier {
            let last = *verts.last().unwrap();
            // Candidates: upper neighbors of the last vertex that are upper
            // neighbors of every other vertex too.
            'cand: for &(u, d_last) in &upper[last as usize] {
                let mut new_value = value.max(d_last);
                for &w in &verts[..verts.len() - 1] {
                    let d = dist(w, u);
                    if d > cutoff {
                        continue 'cand;
                    }
                    new_value = new_value.max(d);
                }
                if !new_value.is_finite() {
                    continue;
                }
                let mut new_verts = verts.clone();
                new_verts.push(u);
                next.push((new_verts, new_value));
            }
        }
        check_budget(simplices.len() + next.len())?;
        for (verts, value) in &next {
            simplices.push(FilteredSimplex {
                simplex: Simplex::new(verts.clone()),
                value: *value,
            });
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    FilteredComplex::from_simplices(simplices, n, top_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cloud(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::new(points.iter().map(|p| p.to_vec()).collect(), None).unwrap()
    }

    #[test]
    fn triangle_enters_at_max_pairwise_distance() {
        let pc = cloud(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let fc = build_vr_filtration(&pc, 2, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let tri = fc.position(&Simplex::new(vec![0, 1, 2])).unwrap();
        assert_relative_eq!(fc.get(tri).value, 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn cutoff_drops_long_edges() {
        let pc = cloud(&[[0.0, 0.0], [3.0, 0.0]]);
        let fc = build_vr_filtration(&pc, 1, Some(2.0), DEFAULT_SIMPLEX_BUDGET).unwrap();
        assert_eq!(fc.len(), 2); // two vertices, no edge
    }

    #[test]
    fn unit_square_hand_enumeration() {
        // 4 edges at 1, 2 diagonals at sqrt(2), 4 triangles at sqrt(2),
        // 1 tetrahedral 3-simplex at sqrt(2) when max_dim = 2.
        let pc = cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let fc = build_vr_filtration(&pc, 2, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let r2 = 2.0f64.sqrt();
        let mut by_dim_value: Vec<(usize, f64)> =
            fc.iter().map(|fs| (fs.simplex.dim(), fs.value)).collect();
        by_dim_value.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let edges: Vec<f64> = by_dim_value
            .iter()
            .filter(|(d, _)| *d == 1)
            .map(|&(_, v)| v)
            .collect();
        assert_eq!(edges.len(), 6);
        assert_eq!(edges.iter().filter(|&&v| v == 1.0).count(), 4);
        assert_eq!(edges.iter().filter(|&&v| (v - r2).abs() < 1e-12).count(), 2);
        let tris: Vec<f64> = by_dim_value
            .iter()
            .filter(|(d, _)| *d == 2)
            .map(|&(_, v)| v)
            .collect();
        assert_eq!(tris.len(), 4);
        assert!(tris.iter().all(|&v| (v - r2).abs() < 1e-12));
    }

    #[test]
    fn duplicate_points_get_zero_edges() {
        let pc = cloud(&[[1.0, 1.0], [1.0, 1.0]]);
        let fc = build_vr_filtration(&pc, 0, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let edge = fc.position(&Simplex::new(vec![0, 1])).unwrap();
        assert_eq!(fc.get(edge).value, 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let points: Vec<[f64; 2]> = (0..30).map(|i| [i as f64 * 1e-3, 0.0]).collect();
        let pc = cloud(&points);
        let err = build_vr_filtration(&pc, 2, None, 100).unwrap_err();
        assert!(matches!(err, TopfError::BudgetExceeded { .. }));
    }

    #[test]
    fn vr_value_matches_recomputed_max_pairwise_distance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let points: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let pc = PointCloud::new(points, None).unwrap();
        let fc = build_vr_filtration(&pc, 2, Some(0.8), DEFAULT_SIMPLEX_BUDGET).unwrap();
        for fs in fc.iter() {
            let vs = fs.simplex.vertices();
            let mut max_d = 0.0f64;
            for (a, &va) in vs.iter().enumerate() {
                for &vb in &vs[a + 1..] {
                    max_d = max_d.max(pc.distance(va as usize, vb as usize));
                }
            }
            assert_relative_eq!(fs.value, max_d, epsilon = 1e-12);
        }
    }
}
