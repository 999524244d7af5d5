//! Alpha filtration on the Delaunay triangulation.
//!
//! A top-dimensional simplex enters at its circumradius. A lower simplex
//! enters at its own circumradius when its circumball is empty of the
//! opposite vertices of its cofaces (the Gabriel condition), and otherwise
//! inherits the smallest value among those cofaces. This downward
//! propagation is what keeps near-cospherical chords and diagonal faces from
//! spawning long-lived spurious homology classes: they enter together with
//! the cofaces that immediately fill them.

use std::collections::HashMap;

use crate::error::Result;
use crate::pointcloud::PointCloud;

use super::geometry::circumsphere;
use super::{delaunay, FilteredComplex, FilteredSimplex, Simplex};

/// Builds the alpha filtration up to simplex dimension
/// `min(max_dim + 1, ambient_dim)`. Vertices enter at 0. Values are made
/// monotone under floating-point noise by a final max-with-faces pass.
pub fn build_alpha_filtration(pc: &PointCloud, max_dim: usize) -> Result<FilteredComplex> {
    let ambient = pc.ambient_dim();
    let top_cells = delaunay(pc)?;

    // Collect the full closure of the Delaunay cells, grouped by dimension.
    let mut by_dim: Vec<Vec<Simplex>> = vec![Vec::new(); ambient + 1];
    {
        let mut seen: HashMap<Simplex, ()> = HashMap::new();
        let mut stack: Vec<Simplex> = top_cells;
        while let Some(s) = stack.pop() {
            if seen.contains_key(&s) {
                continue;
            }
            if s.dim() > 0 {
                for f in s.faces() {
                    stack.push(f);
                }
            }
            by_dim[s.dim()].push(s.clone());
            seen.insert(s, ());
        }
    }
    for d in &mut by_dim {
        d.sort_unstable();
    }

    let radius = |s: &Simplex| -> f64 {
        let pts: Vec<&[f64]> = s.vertices().iter().map(|&v| pc.point(v as usize)).collect();
        match circumsphere(&pts) {
            Some((_, r2)) => r2.sqrt(),
            None => f64::INFINITY,
        }
    };

    // Downward value propagation, one dimension at a time. Near-degenerate
    // simplices (flat slivers from exactly cospherical or coplanar inputs)
    // have no usable circumradius; they are valued later as the max of
    // their faces and never donate a value downward.
    let mut values: HashMap<Simplex, f64> = HashMap::new();
    for k in (1..=ambient).rev() {
        for s in &by_dim[k] {
            let alpha = *values.entry(s.clone()).or_insert_with(|| radius(s));
            if !alpha.is_finite() {
                continue;
            }
            for (omit, face) in s.faces().enumerate() {
                if face.dim() == 0 {
                    continue;
                }
                match values.get_mut(&face) {
                    Some(v) => *v = v.min(alpha),
                    None => {
                        let opposite = pc.point(s.vertices()[omit] as usize);
                        let pts: Vec<&[f64]> = face
                            .vertices()
                            .iter()
                            .map(|&v| pc.point(v as usize))
                            .collect();
                        let gabriel = match circumsphere(&pts) {
                            Some((center, r2)) => {
                                let d2: f64 = center
                                    .iter()
                                    .zip(opposite)
                                    .map(|(c, x)| (c - x) * (c - x))
                                    .sum();
                                d2 >= r2
                            }
                            None => true,
                        };
                        if !gabriel {
                            values.insert(face.clone(), alpha);
                        }
                    }
                }
            }
        }
    }

    let top = max_dim.saturating_add(1).min(ambient);
    let mut simplices: Vec<FilteredSimplex> = Vec::new();
    for v in 0..pc.len() as u32 {
        simplices.push(FilteredSimplex {
            simplex: Simplex::vertex(v),
            value: 0.0,
        });
    }
    // Monotone safety net against floating-point noise: a simplex never
    // precedes one of its faces.
    let mut final_values: HashMap<Simplex, f64> = HashMap::new();
    for k in 1..=top {
        for s in &by_dim[k] {
            let mut value = values.get(s).copied().unwrap_or_else(|| radius(s));
            if !value.is_finite() {
                // Flat simplex: it fills as soon as its boundary is present.
                value = 0.0;
            }
            for face in s.faces() {
                if face.dim() > 0 {
                    value = value.max(final_values[&face]);
                }
            }
            final_values.insert(s.clone(), value);
            simplices.push(FilteredSimplex {
                simplex: s.clone(),
                value,
            });
        }
    }

    FilteredComplex::from_simplices(simplices, pc.len(), top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::geometry::circumradius;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        PointCloud::new(points, None).unwrap()
    }

    #[test]
    fn equilateral_triangle_values() {
        let pc = cloud(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 3.0f64.sqrt() / 2.0],
        ]);
        let fc = build_alpha_filtration(&pc, 1).unwrap();
        let tri = fc.position(&Simplex::new(vec![0, 1, 2])).unwrap();
        assert_relative_eq!(fc.get(tri).value, 1.0 / 3.0f64.sqrt(), epsilon = 1e-12);
        // Edges of an acute triangle are Gabriel: value = half length.
        let edge = fc.position(&Simplex::new(vec![0, 1])).unwrap();
        assert_relative_eq!(fc.get(edge).value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn unit_square_triangles_at_half_hypotenuse() {
        let pc = cloud(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]);
        let fc = build_alpha_filtration(&pc, 1).unwrap();
        let r = 2.0f64.sqrt() / 2.0;
        let mut triangle_values = vec![];
        let mut side_values = vec![];
        for fs in fc.iter() {
            match fs.simplex.dim() {
                2 => triangle_values.push(fs.value),
                1 => {
                    let vs = fs.simplex.vertices();
                    let d = pc.distance(vs[0] as usize, vs[1] as usize);
                    if (d - 1.0).abs() < 1e-12 {
                        side_values.push(fs.value);
                    }
                }
                _ => {}
            }
        }
        assert_eq!(triangle_values.len(), 2);
        for v in triangle_values {
            assert_relative_eq!(v, r, epsilon = 1e-12);
        }
        assert_eq!(side_values.len(), 4);
        for v in side_values {
            assert_relative_eq!(v, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn obtuse_triangle_long_edge_inherits() {
        // Very flat triangle: the long edge's diametral disk contains the
        // apex, so the edge is not Gabriel and inherits the triangle value.
        let pc = cloud(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.2]]);
        let fc = build_alpha_filtration(&pc, 1).unwrap();
        let tri_r = circumradius(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 0.2]]);
        let long_edge = fc.position(&Simplex::new(vec![0, 1])).unwrap();
        assert_relative_eq!(fc.get(long_edge).value, tri_r, epsilon = 1e-12);
        // Short edges stay Gabriel.
        let short = fc.position(&Simplex::new(vec![0, 2])).unwrap();
        let half = pc.distance(0, 2) / 2.0;
        assert_relative_eq!(fc.get(short).value, half, epsilon = 1e-12);
    }

    #[test]
    fn vertices_enter_at_zero() {
        let pc = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let fc = build_alpha_filtration(&pc, 1).unwrap();
        for fs in fc.iter().filter(|fs| fs.simplex.dim() == 0) {
            assert_eq!(fs.value, 0.0);
        }
    }

    #[test]
    fn face_circumradii_are_monotone_on_random_clouds() {
        // Geometric invariant: circumradius of a Delaunay simplex is at
        // least the circumradius of each of its faces.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dim in [2usize, 3] {
            let points: Vec<Vec<f64>> = (0..30)
                .map(|_| (0..dim).map(|_| rng.gen::<f64>() * 3.0).collect())
                .collect();
            let pc = cloud(points);
            let cells = delaunay(&pc).unwrap();
            for cell in &cells {
                let pts: Vec<&[f64]> =
                    cell.vertices().iter().map(|&v| pc.point(v as usize)).collect();
                let big = circumradius(&pts);
                for face in cell.faces() {
                    let fpts: Vec<&[f64]> =
                        face.vertices().iter().map(|&v| pc.point(v as usize)).collect();
                    assert!(circumradius(&fpts) <= big + 1e-9);
                }
            }
        }
    }

    #[test]
    fn filtration_values_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let pc = cloud(points);
        let fc = build_alpha_filtration(&pc, 2).unwrap();
        for fs in fc.iter() {
            for face in fs.simplex.faces() {
                if fs.simplex.dim() == 0 {
                    continue;
                }
                let fi = fc.position(&face).expect("closed under faces");
                assert!(fc.get(fi).value <= fs.value);
            }
        }
    }
}
