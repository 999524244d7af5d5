//! Incremental Delaunay triangulation in 2D and 3D.
//!
//! Bowyer–Watson insertion over a large enclosing super-simplex, with exact
//! adaptive predicates for all orientation and in-sphere decisions. Conflict
//! is strict (a point exactly on a circumsphere does not carve), so
//! cospherical inputs such as regular grids produce a valid triangulation
//! with one of the tied diagonal choices; the result always satisfies the
//! open-circumball (weak Delaunay) property.

use std::collections::{HashMap, HashSet};

use robust::{incircle, insphere, orient2d, orient3d, Coord, Coord3D};

use crate::error::{Result, TopfError};
use crate::pointcloud::PointCloud;

use super::Simplex;

const NONE: u32 = u32::MAX;
const SUPER_SCALE: f64 = 1e6;

/// Delaunay triangulation of a 2D or 3D cloud; returns the top-dimensional
/// simplices. Fails on duplicate points, fewer than `dim + 1` points, and
/// affinely degenerate inputs (all collinear / coplanar).
pub fn delaunay(pc: &PointCloud) -> Result<Vec<Simplex>> {
    let dim = pc.ambient_dim();
    if !(2..=3).contains(&dim) {
        return Err(TopfError::InvalidParameter(format!(
            "Delaunay triangulation supports ambient dimension 2 or 3, got {dim}"
        )));
    }
    if pc.len() < dim + 1 {
        return Err(TopfError::Degenerate(format!(
            "need at least {} points in dimension {dim}, got {}",
            dim + 1,
            pc.len()
        )));
    }
    // Exact duplicates break incremental insertion; reject them up front.
    let mut seen: HashMap<[u64; 3], usize> = HashMap::with_capacity(pc.len());
    for i in 0..pc.len() {
        let p = pc.point(i);
        let key = [
            p[0].to_bits(),
            p[1].to_bits(),
            if dim == 3 { p[2].to_bits() } else { 0 },
        ];
        if let Some(&first) = seen.get(&key) {
            return Err(TopfError::DuplicatePoint(first, i));
        }
        seen.insert(key, i);
    }

    let mut tri = Triangulator::new(pc, dim);
    for &p in &insertion_order(pc) {
        tri.insert(p as u32)?;
    }
    tri.finish()
}

/// Morton (z-order) insertion sequence: keeps consecutive insertions
/// spatially close so the walk-based point location stays short.
fn insertion_order(pc: &PointCloud) -> Vec<usize> {
    let dim = pc.ambient_dim();
    let mut mins = vec![f64::INFINITY; dim];
    let mut maxs = vec![f64::NEG_INFINITY; dim];
    for p in pc.iter_points() {
        for (c, &x) in p.iter().enumerate() {
            mins[c] = mins[c].min(x);
            maxs[c] = maxs[c].max(x);
        }
    }
    let bits = 20u32;
    let buckets = ((1u64 << bits) - 1) as f64;
    let code = |i: usize| -> u64 {
        let p = pc.point(i);
        let mut out = 0u64;
        for (c, &x) in p.iter().enumerate() {
            let extent = (maxs[c] - mins[c]).max(f64::MIN_POSITIVE);
            let q = (((x - mins[c]) / extent) * buckets) as u64;
            for b in 0..bits {
                out |= ((q >> b) & 1) << (b as usize * dim + c);
            }
        }
        out
    };
    let mut order: Vec<usize> = (0..pc.len()).collect();
    order.sort_by_key(|&i| (code(i), i));
    order
}

#[derive(Clone, Copy)]
struct Cell {
    verts: [u32; 4],
    alive: bool,
}

struct Triangulator {
    dim: usize,
    n: usize,
    coords: Vec<[f64; 3]>,
    cells: Vec<Cell>,
    // Face key (sorted, padded with NONE) -> the at most two incident cells.
    faces: HashMap<[u32; 3], [u32; 2]>,
    last_created: u32,
}

impl Triangulator {
    fn new(pc: &PointCloud, dim: usize) -> Triangulator {
        let n = pc.len();
        let mut coords: Vec<[f64; 3]> = pc
            .iter_points()
            .map(|p| [p[0], p[1], if dim == 3 { p[2] } else { 0.0 }])
            .collect();

        let mut center = [0.0f64; 3];
        let mut radius: f64 = 0.0;
        for c in 0..dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in &coords {
                lo = lo.min(p[c]);
                hi = hi.max(p[c]);
            }
            center[c] = (lo + hi) / 2.0;
            radius = radius.max((hi - lo) / 2.0);
        }
        let s = (radius.max(1e-9)) * SUPER_SCALE;

        let mut super_verts: Vec<[f64; 3]> = if dim == 2 {
            [90.0f64, 210.0, 330.0]
                .iter()
                .map(|deg| {
                    let a = deg.to_radians();
                    [center[0] + s * a.cos(), center[1] + s * a.sin(), 0.0]
                })
                .collect()
        } else {
            [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
                .iter()
                .map(|d| {
                    [
                        center[0] + s * d[0],
                        center[1] + s * d[1],
                        center[2] + s * d[2],
                    ]
                })
                .collect()
        };

        // The initial cell must be positively oriented.
        let flip = if dim == 2 {
            orient2d(c2(super_verts[0]), c2(super_verts[1]), c2(super_verts[2])) < 0.0
        } else {
            orient3d(
                c3(super_verts[0]),
                c3(super_verts[1]),
                c3(super_verts[2]),
                c3(super_verts[3]),
            ) < 0.0
        };
        if flip {
            super_verts.swap(0, 1);
        }
        coords.extend(super_verts);

        let mut tri = Triangulator {
            dim,
            n,
            coords,
            cells: Vec::new(),
            faces: HashMap::new(),
            last_created: 0,
        };
        let mut verts = [NONE; 4];
        for (i, v) in (n..n + dim + 1).enumerate() {
            verts[i] = v as u32;
        }
        tri.push_cell(verts);
        tri
    }

    fn facet(&self, verts: [u32; 4], omit: usize) -> [u32; 3] {
        let mut f = [NONE; 3];
        let mut w = 0;
        for (i, &v) in verts[..=self.dim].iter().enumerate() {
            if i != omit {
                f[w] = v;
                w += 1;
            }
        }
        f
    }

    fn face_key(&self, f: [u32; 3]) -> [u32; 3] {
        let mut k = f;
        k.sort_unstable();
        k
    }

    fn register_face(&mut self, f: [u32; 3], cell: u32) {
        let key = self.face_key(f);
        let slots = self.faces.entry(key).or_insert([NONE, NONE]);
        if slots[0] == NONE {
            slots[0] = cell;
        } else {
            debug_assert_eq!(slots[1], NONE, "face with more than two cells");
            slots[1] = cell;
        }
    }

    fn unregister_face(&mut self, f: [u32; 3], cell: u32) {
        let key = self.face_key(f);
        let slots = self.faces.get_mut(&key).expect("face registered");
        if slots[0] == cell {
            slots[0] = NONE;
        } else {
            debug_assert_eq!(slots[1], cell);
            slots[1] = NONE;
        }
        if *slots == [NONE, NONE] {
            self.faces.remove(&key);
        }
    }

    fn neighbor(&self, f: [u32; 3], cell: u32) -> u32 {
        let key = self.face_key(f);
        match self.faces.get(&key) {
            None => NONE,
            Some(&[a, b]) => {
                if a == cell {
                    b
                } else {
                    a
                }
            }
        }
    }

    fn push_cell(&mut self, verts: [u32; 4]) -> u32 {
        let id = self.cells.len() as u32;
        self.cells.push(Cell { verts, alive: true });
        for omit in 0..=self.dim {
            let f = self.facet(verts, omit);
            self.register_face(f, id);
        }
        self.last_created = id;
        id
    }

    fn kill_cell(&mut self, id: u32) {
        let verts = self.cells[id as usize].verts;
        for omit in 0..=self.dim {
            let f = self.facet(verts, omit);
            self.unregister_face(f, id);
        }
        self.cells[id as usize].alive = false;
    }

    /// Orientation of `x` against the hyperplane through the facet.
    fn side(&self, f: [u32; 3], x: u32) -> f64 {
        let p = |v: u32| self.coords[v as usize];
        if self.dim == 2 {
            orient2d(c2(p(f[0])), c2(p(f[1])), c2(p(x)))
        } else {
            orient3d(c3(p(f[0])), c3(p(f[1])), c3(p(f[2])), c3(p(x)))
        }
    }

    /// Strict conflict: `x` lies in the open circumball of the cell.
    fn conflicts(&self, cell: u32, x: u32) -> bool {
        let vs = self.cells[cell as usize].verts;
        let p = |v: u32| self.coords[v as usize];
        if self.dim == 2 {
            incircle(c2(p(vs[0])), c2(p(vs[1])), c2(p(vs[2])), c2(p(x))) > 0.0
        } else {
            insphere(
                c3(p(vs[0])),
                c3(p(vs[1])),
                c3(p(vs[2])),
                c3(p(vs[3])),
                c3(p(x)),
            ) > 0.0
        }
    }

    /// Walk toward `p` from the most recent cell; returns a cell whose
    /// closure contains `p`. Falls back to a linear conflict scan if the
    /// walk exceeds its step cap.
    fn locate(&self, p: u32) -> Option<u32> {
        let mut current = self.last_created;
        if !self.cells[current as usize].alive {
            return self.scan(p);
        }
        let cap = 4 * self.cells.len() + 64;
        let mut steps = 0;
        'walk: loop {
            steps += 1;
            if steps > cap {
                return self.scan(p);
            }
            let verts = self.cells[current as usize].verts;
            for omit in 0..=self.dim {
                let f = self.facet(verts, omit);
                let sp = self.side(f, p);
                if sp == 0.0 {
                    continue;
                }
                let so = self.side(f, verts[omit]);
                debug_assert!(so != 0.0, "degenerate cell in triangulation");
                if (sp > 0.0) != (so > 0.0) {
                    let nb = self.neighbor(f, current);
                    if nb == NONE {
                        return self.scan(p);
                    }
                    current = nb;
                    continue 'walk;
                }
            }
            return Some(current);
        }
    }

    fn scan(&self, p: u32) -> Option<u32> {
        (0..self.cells.len() as u32)
            .find(|&c| self.cells[c as usize].alive && self.conflicts(c, p))
    }

    fn insert(&mut self, p: u32) -> Result<()> {
        let seed = match self.locate(p) {
            Some(c) if self.conflicts(c, p) => c,
            _ => self.scan(p).ok_or_else(|| {
                TopfError::Degenerate(format!("point {p} conflicts with no cell"))
            })?,
        };

        // Strict conflict region (connected; discovered over facet adjacency).
        let mut cavity: Vec<u32> = Vec::new();
        let mut in_cavity: HashSet<u32> = HashSet::new();
        let mut stack = vec![seed];
        in_cavity.insert(seed);
        while let Some(c) = stack.pop() {
            cavity.push(c);
            let verts = self.cells[c as usize].verts;
            for omit in 0..=self.dim {
                let f = self.facet(verts, omit);
                let nb = self.neighbor(f, c);
                if nb != NONE && !in_cavity.contains(&nb) && self.conflicts(nb, p) {
                    in_cavity.insert(nb);
                    stack.push(nb);
                }
            }
        }

        // Boundary facets, oriented positively toward p.
        let mut boundary: Vec<[u32; 3]> = Vec::new();
        for &c in &cavity {
            let verts = self.cells[c as usize].verts;
            for omit in 0..=self.dim {
                let f = self.facet(verts, omit);
                let nb = self.neighbor(f, c);
                if nb == NONE || !in_cavity.contains(&nb) {
                    boundary.push(f);
                }
            }
        }

        for &c in &cavity {
            self.kill_cell(c);
        }
        for f in boundary {
            let s = self.side(f, p);
            // With exact predicates a strict-cavity boundary facet is never
            // coplanar with the inserted point (it would imply the outside
            // cell conflicts strictly).
            if s == 0.0 {
                return Err(TopfError::Degenerate(format!(
                    "insertion of point {p} produced a flat cell"
                )));
            }
            let mut f = f;
            if s < 0.0 {
                f.swap(0, 1);
            }
            let mut verts = [NONE; 4];
            verts[..self.dim].copy_from_slice(&f[..self.dim]);
            verts[self.dim] = p;
            self.push_cell(verts);
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<Simplex>> {
        let n = self.n as u32;
        let mut out: Vec<Simplex> = self
            .cells
            .iter()
            .filter(|c| c.alive && c.verts[..=self.dim].iter().all(|&v| v < n))
            .map(|c| Simplex::new(c.verts[..=self.dim].to_vec()))
            .collect();
        if out.is_empty() {
            return Err(TopfError::Degenerate(
                "points are affinely degenerate (collinear or coplanar)".into(),
            ));
        }
        out.sort_unstable();
        Ok(out)
    }
}

fn c2(p: [f64; 3]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn c3(p: [f64; 3]) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        PointCloud::new(points, None).unwrap()
    }

    /// Brute-force weak Delaunay oracle: no input point strictly inside any
    /// output simplex's circumball, checked with the exact predicates.
    fn assert_weak_delaunay(pc: &PointCloud, cells: &[Simplex]) {
        let dim = pc.ambient_dim();
        for cell in cells {
            let vs = cell.vertices();
            for q in 0..pc.len() as u32 {
                if vs.contains(&q) {
                    continue;
                }
                let inside = if dim == 2 {
                    let p = |v: u32| {
                        let c = pc.point(v as usize);
                        Coord { x: c[0], y: c[1] }
                    };
                    let ccw = orient2d(p(vs[0]), p(vs[1]), p(vs[2]));
                    assert!(ccw != 0.0, "degenerate output triangle");
                    let (a, b) = if ccw > 0.0 { (0, 1) } else { (1, 0) };
                    incircle(p(vs[a]), p(vs[b]), p(vs[2]), p(q)) > 0.0
                } else {
                    let p = |v: u32| {
                        let c = pc.point(v as usize);
                        Coord3D {
                            x: c[0],
                            y: c[1],
                            z: c[2],
                        }
                    };
                    let o = orient3d(p(vs[0]), p(vs[1]), p(vs[2]), p(vs[3]));
                    assert!(o != 0.0, "degenerate output tetrahedron");
                    let (a, b) = if o > 0.0 { (0, 1) } else { (1, 0) };
                    insphere(p(vs[a]), p(vs[b]), p(vs[2]), p(vs[3]), p(q)) > 0.0
                };
                assert!(
                    !inside,
                    "point {q} strictly inside circumball of {vs:?}"
                );
            }
        }
    }

    #[test]
    fn unit_square_gives_two_triangles() {
        let pc = cloud(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]);
        let cells = delaunay(&pc).unwrap();
        assert_eq!(cells.len(), 2);
        // The two triangles share exactly one diagonal (two vertices).
        let a: HashSet<u32> = cells[0].vertices().iter().copied().collect();
        let b: HashSet<u32> = cells[1].vertices().iter().copied().collect();
        assert_eq!(a.intersection(&b).count(), 2);
        assert_eq!(a.union(&b).count(), 4);
        assert_weak_delaunay(&pc, &cells);
    }

    #[test]
    fn four_generic_3d_points_give_one_tetrahedron() {
        let pc = cloud(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.3, 0.3, 1.0],
        ]);
        let cells = delaunay(&pc).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].vertices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn random_2d_cloud_satisfies_empty_circumcircle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let points: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.gen::<f64>() * 4.0, rng.gen::<f64>() * 4.0])
            .collect();
        let pc = cloud(points);
        let cells = delaunay(&pc).unwrap();
        assert_weak_delaunay(&pc, &cells);
    }

    #[test]
    fn random_3d_cloud_satisfies_empty_circumsphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let pc = cloud(points);
        let cells = delaunay(&pc).unwrap();
        assert_weak_delaunay(&pc, &cells);
    }

    #[test]
    fn exact_grid_is_triangulated() {
        // Every grid cell is exactly cocircular: the tie rule must still
        // produce a full triangulation (2 triangles per cell).
        let mut points = Vec::new();
        for i in 0..7 {
            for j in 0..7 {
                points.push(vec![i as f64, j as f64]);
            }
        }
        let pc = cloud(points);
        let cells = delaunay(&pc).unwrap();
        assert_eq!(cells.len(), 2 * 36);
        assert_weak_delaunay(&pc, &cells);
    }

    #[test]
    fn cube_corners_are_tetrahedralized() {
        let mut points = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    points.push(vec![i as f64, j as f64, k as f64]);
                }
            }
        }
        let pc = cloud(points);
        let cells = delaunay(&pc).unwrap();
        // Any tetrahedralization of the cube has 5 or 6 tetrahedra.
        assert!(cells.len() == 5 || cells.len() == 6, "{}", cells.len());
        assert_weak_delaunay(&pc, &cells);
    }

    #[test]
    fn near_cocircular_points_stay_valid() {
        let n = 40;
        let points: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let a = i as f64 / n as f64 * std::f64::consts::TAU;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let pc = cloud(points);
        let cells = delaunay(&pc).unwrap();
        // A triangulation of a convex n-gon has n - 2 triangles.
        assert_eq!(cells.len(), n - 2);
        assert_weak_delaunay(&pc, &cells);
    }

    #[test]
    fn collinear_points_error() {
        let pc = cloud((0..5).map(|i| vec![i as f64, 0.0]).collect());
        assert!(matches!(delaunay(&pc), Err(TopfError::Degenerate(_))));
    }

    #[test]
    fn coplanar_3d_points_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pc = cloud(
            (0..10)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>(), 0.5])
                .collect(),
        );
        assert!(matches!(delaunay(&pc), Err(TopfError::Degenerate(_))));
    }

    #[test]
    fn duplicate_points_error() {
        let pc = cloud(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ]);
        assert!(matches!(delaunay(&pc), Err(TopfError::DuplicatePoint(1, 2))));
    }

    #[test]
    fn too_few_points_error() {
        let pc = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert!(delaunay(&pc).is_err());
    }
}
