//! Iterative least-squares solver (LSMR) over abstract linear operators.
//!
//! LSMR is analytically equivalent to MINRES applied to the normal
//! equations; it minimizes ||A x - b|| with monotonically decreasing
//! ||A^T r||, which is the quantity the harmonic projection needs driven to
//! zero. Deterministic: no randomization, fixed iteration order.

/// Matrix-free linear operator.
pub trait LinearOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// out = A x (out has length `rows`).
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// out = Aᵀ y (out has length `cols`).
    fn apply_transpose(&self, y: &[f64], out: &mut [f64]);
}

#[derive(Clone, Debug)]
pub struct LsmrResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Whether a residual-based stopping rule fired before the iteration cap.
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Stable Givens rotation: returns (c, s, r) with c*a + s*b = r,
/// -s*a + c*b = 0.
fn sym_ortho(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        (if a < 0.0 { -1.0 } else { 1.0 }, 0.0, a.abs())
    } else if a == 0.0 {
        (0.0, if b < 0.0 { -1.0 } else { 1.0 }, b.abs())
    } else if b.abs() > a.abs() {
        let tau = a / b;
        let s = (if b < 0.0 { -1.0 } else { 1.0 }) / (1.0 + tau * tau).sqrt();
        let c = s * tau;
        (c, s, b / s)
    } else {
        let tau = b / a;
        let c = (if a < 0.0 { -1.0 } else { 1.0 }) / (1.0 + tau * tau).sqrt();
        let s = c * tau;
        (c, s, a / c)
    }
}

/// Minimizes ||A x - b||_2 from a zero starting vector.
pub fn lsmr(
    op: &dyn LinearOperator,
    b: &[f64],
    atol: f64,
    btol: f64,
    max_iter: usize,
) -> LsmrResult {
    let m = op.rows();
    let n = op.cols();
    debug_assert_eq!(b.len(), m);
    let mut x = vec![0.0; n];
    if n == 0 || m == 0 {
        return LsmrResult {
            x,
            iterations: 0,
            converged: true,
        };
    }

    let mut u = b.to_vec();
    let normb = norm(&u);
    if normb == 0.0 {
        return LsmrResult {
            x,
            iterations: 0,
            converged: true,
        };
    }
    let mut beta = normb;
    u.iter_mut().for_each(|e| *e /= beta);

    let mut v = vec![0.0; n];
    op.apply_transpose(&u, &mut v);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        // b is orthogonal to the range of A: x = 0 is optimal.
        return LsmrResult {
            x,
            iterations: 0,
            converged: true,
        };
    }
    v.iter_mut().for_each(|e| *e /= alpha);

    let mut h = v.clone();
    let mut hbar = vec![0.0; n];

    let mut zetabar = alpha * beta;
    let mut alphabar = alpha;
    let mut rho = 1.0;
    let mut rhobar = 1.0;
    let mut cbar = 1.0;
    let mut sbar = 0.0;

    // Quantities for the ||r|| estimate.
    let mut betadd = beta;
    let mut betad = 0.0;
    let mut rhodold = 1.0;
    let mut tautildeold = 0.0;
    let mut thetatilde = 0.0;
    let mut zeta = 0.0;
    let mut norm_a2 = alpha * alpha;

    let mut tmp_m = vec![0.0; m];
    let mut tmp_n = vec![0.0; n];

    for itn in 1..=max_iter {
        // Golub-Kahan bidiagonalization step.
        op.apply(&v, &mut tmp_m);
        for (ui, &ti) in u.iter_mut().zip(&tmp_m) {
            *ui = ti - alpha * *ui;
        }
        beta = norm(&u);
        if beta > 0.0 {
            u.iter_mut().for_each(|e| *e /= beta);
        }
        op.apply_transpose(&u, &mut tmp_n);
        for (vi, &ti) in v.iter_mut().zip(&tmp_n) {
            *vi = ti - beta * *vi;
        }
        alpha = norm(&v);
        if alpha > 0.0 {
            v.iter_mut().for_each(|e| *e /= alpha);
        }

        // Plane rotations folding the bidiagonal structure.
        let alphahat = alphabar;
        let rhoold = rho;
        let (c, s, rho_new) = sym_ortho(alphahat, beta);
        rho = rho_new;
        let thetanew = s * alpha;
        alphabar = c * alpha;

        let rhobarold = rhobar;
        let zetaold = zeta;
        let thetabar = sbar * rho;
        let (cbar_new, sbar_new, rhobar_new) = sym_ortho(cbar * rho, thetanew);
        cbar = cbar_new;
        sbar = sbar_new;
        rhobar = rhobar_new;
        zeta = cbar * zetabar;
        zetabar = -sbar * zetabar;

        if rho == 0.0 || rhobar == 0.0 {
            return LsmrResult {
                x,
                iterations: itn,
                converged: true,
            };
        }

        // Update hbar, x, h.
        let hbar_scale = thetabar * rho / (rhoold * rhobarold);
        for (hb, &hi) in hbar.iter_mut().zip(&h) {
            *hb = hi - hbar_scale * *hb;
        }
        let x_scale = zeta / (rho * rhobar);
        for (xi, &hb) in x.iter_mut().zip(&hbar) {
            *xi += x_scale * hb;
        }
        let h_scale = thetanew / rho;
        for (hi, &vi) in h.iter_mut().zip(&v) {
            *hi = vi - h_scale * *hi;
        }

        // Residual-norm estimate.
        let betaacute = betadd;
        let betahat = c * betaacute;
        betadd = -s * betaacute;

        let thetatildeold = thetatilde;
        let (ctildeold, stildeold, rhotildeold) = sym_ortho(rhodold, thetabar);
        thetatilde = stildeold * rhobar;
        rhodold = ctildeold * rhobar;
        betad = -stildeold * betad + ctildeold * betahat;

        tautildeold = (zetaold - thetatildeold * tautildeold) / rhotildeold;
        let taud = (zeta - thetatilde * tautildeold) / rhodold;
        let normr = ((betad - taud).powi(2) + betadd * betadd).sqrt();

        norm_a2 += beta * beta;
        let norm_a = norm_a2.sqrt();
        norm_a2 += alpha * alpha;

        let normar = zetabar.abs();
        let normx = norm(&x);

        // Stopping rules (Fong & Saunders).
        let test1 = normr / normb;
        let test2 = if norm_a * normr != 0.0 {
            normar / (norm_a * normr)
        } else {
            f64::INFINITY
        };
        let t1 = test1 / (1.0 + norm_a * normx / normb);
        let rtol = btol + atol * norm_a * normx / normb;
        let machine_converged = (1.0 + test2 <= 1.0) || (1.0 + t1 <= 1.0);
        if machine_converged || test2 <= atol || test1 <= rtol {
            return LsmrResult {
                x,
                iterations: itn,
                converged: true,
            };
        }
    }

    LsmrResult {
        x,
        iterations: max_iter,
        converged: false,
    }
}

/// Dense row-major operator, used by tests and small dense paths.
pub struct DenseOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> DenseOperator {
        assert_eq!(data.len(), rows * cols);
        DenseOperator { rows, cols, data }
    }
}

impl LinearOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.rows {
            out[r] = self.data[r * self.cols..(r + 1) * self.cols]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for r in 0..self.rows {
            let yr = y[r];
            if yr == 0.0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.data[r * self.cols + c] * yr;
            }
        }
    }
}
