//! Small dense helpers for circumspheres of low-dimensional simplices.

/// Circumsphere of `k+1` affinely independent points in R^n (k ≤ n ≤ 3):
/// the unique sphere through the points centered in their affine hull.
/// Returns `(center, squared radius)`, or `None` when the points are
/// affinely degenerate.
pub fn circumsphere(points: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let k = points.len() - 1;
    let dim = points[0].len();
    if k == 0 {
        return Some((points[0].to_vec(), 0.0));
    }

    // Solve the k x k Gram system G x = rhs with G_ij = v_i . v_j,
    // rhs_i = |v_i|^2 / 2, where v_i = p_i - p_0. The circumcenter is
    // p_0 + sum_j x_j v_j.
    let v: Vec<Vec<f64>> = (1..=k)
        .map(|i| {
            (0..dim)
                .map(|c| points[i][c] - points[0][c])
                .collect::<Vec<f64>>()
        })
        .collect();
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = dot(&v[i], &v[j]);
        }
        rhs[i] = a[i][i] / 2.0;
    }

    let scale = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| a[i][j].abs())
        .fold(0.0f64, f64::max);
    let x = solve_small(&mut a, &mut rhs, k, scale)?;

    let mut center = points[0].to_vec();
    for (j, vj) in v.iter().enumerate() {
        for c in 0..dim {
            center[c] += x[j] * vj[c];
        }
    }
    let r2 = (0..dim)
        .map(|c| {
            let d = center[c] - points[0][c];
            d * d
        })
        .sum();
    Some((center, r2))
}

/// Circumradius of a simplex; `f64::INFINITY` when degenerate.
pub fn circumradius(points: &[&[f64]]) -> f64 {
    match circumsphere(points) {
        Some((_, r2)) => r2.sqrt(),
        None => f64::INFINITY,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting on a k x k system, k ≤ 3.
fn solve_small(a: &mut [[f64; 3]; 3], rhs: &mut [f64; 3], k: usize, scale: f64) -> Option<[f64; 3]> {
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() <= eps {
            return None;
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            rhs.swap(pivot_row, col);
        }
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..k {
                a[row][c] -= f * a[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..k).rev() {
        let mut s = rhs[row];
        for c in row + 1..k {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn edge_circumradius_is_half_length() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        assert_relative_eq!(circumradius(&[&a, &b]), 0.5, epsilon = 1e-12);
        let c = [3.0, 4.0];
        assert_relative_eq!(circumradius(&[&a, &c]), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn equilateral_triangle_circumradius() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.5, 3.0f64.sqrt() / 2.0];
        assert_relative_eq!(
            circumradius(&[&a, &b, &c]),
            1.0 / 3.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn right_triangle_circumradius_is_half_hypotenuse() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 1.0];
        assert_relative_eq!(
            circumradius(&[&a, &b, &c]),
            2.0f64.sqrt() / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn regular_tetrahedron_circumradius() {
        // Vertices of a regular tetrahedron with edge length sqrt(8):
        // circumradius = sqrt(3).
        let pts = [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ];
        let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        assert_relative_eq!(circumradius(&refs), 3.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn triangle_in_3d_uses_plane_circle() {
        // An equilateral triangle embedded in a tilted plane.
        let a = [0.0, 0.0, 1.0];
        let b = [1.0, 0.0, 1.0];
        let c = [0.5, 3.0f64.sqrt() / 2.0, 1.0];
        assert_relative_eq!(
            circumradius(&[&a, &b, &c]),
            1.0 / 3.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [2.0, 0.0];
        assert_eq!(circumradius(&[&a, &b, &c]), f64::INFINITY);
    }
}
