//! Extended-precision solve path for the continuation fit.
//!
//! Double precision cannot push the truncated-SVD reconstruction floor much
//! below ~1e-12 on hard cases: the kept/discarded split happens at singular
//! values near eps*sigma_1, exactly where a double-precision SVD has lost all
//! digits. This module redoes the factorization and the minimum-norm solve in
//! double-double arithmetic (Householder QR, then one-sided Jacobi on the
//! triangular factor preconditioned by the double-precision right singular
//! vectors), which keeps small singular values and their subspaces accurate
//! well past the double-precision noise floor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::lsq_svd::XiMode;

const ZERO: TwoFloat = TwoFloat::from_f64(0.0);
const ONE: TwoFloat = TwoFloat::from_f64(1.0);

/// Column-major double-double matrix.
struct DdMat {
    rows: usize,
    cols: usize,
    d: Vec<TwoFloat>,
}

impl DdMat {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            d: vec![ZERO; rows * cols],
        }
    }

    #[inline]
    fn col(&self, j: usize) -> &[TwoFloat] {
        &self.d[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    fn col_mut(&mut self, j: usize) -> &mut [TwoFloat] {
        &mut self.d[j * self.rows..(j + 1) * self.rows]
    }
}

/// -2*pi*x/b as a double-double angle.
fn phase_step(x: f64, b: f64) -> TwoFloat {
    let two_pi = twofloat::consts::PI * 2.0;
    -(two_pi * x) / b
}

/// Double-double rebuild of [`crate::continuation::design_matrix`].
fn design_matrix_dd(points: &[f64], modes: usize, b: f64, complex_system: bool) -> DdMat {
    let n = points.len();
    let cols = if complex_system { 2 * modes } else { modes };
    let mut a = DdMat::zeros(2 * n, cols);
    for (j, &x) in points.iter().enumerate() {
        let (sn, cs) = phase_step(x, b).sin_cos();
        let mut tre = ONE;
        let mut tim = ZERO;
        for k in 0..modes {
            let re = tre * cs - tim * sn;
            let im = tre * sn + tim * cs;
            tre = re;
            tim = im;
            if complex_system {
                a.d[k * a.rows + j] = re;
                a.d[(modes + k) * a.rows + j] = -im;
                a.d[k * a.rows + n + j] = im;
                a.d[(modes + k) * a.rows + n + j] = re;
            } else {
                a.d[k * a.rows + j] = re;
                a.d[k * a.rows + n + j] = im;
            }
        }
    }
    a
}

fn dot(a: &[TwoFloat], b: &[TwoFloat]) -> TwoFloat {
    let mut s = ZERO;
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

/// In-place Householder QR; returns the upper triangle as a dense square
/// matrix and overwrites `rhs` with Q^T rhs.
fn qr_in_place(a: &mut DdMat, rhs: &mut [TwoFloat]) -> DdMat {
    let (rows, cols) = (a.rows, a.cols);
    for k in 0..cols {
        let mut norm2 = ZERO;
        {
            let ck = &a.col(k)[k..];
            for x in ck {
                norm2 += *x * *x;
            }
        }
        if norm2.hi() == 0.0 {
            continue;
        }
        let norm = norm2.sqrt();
        let x0 = a.col(k)[k];
        let alpha = if x0.hi() >= 0.0 { -norm } else { norm };
        // v = x - alpha*e1, stored over the column; ||v||^2 via the update.
        let v0 = x0 - alpha;
        let vnorm2 = norm2 - x0 * x0 + v0 * v0;
        if vnorm2.hi() == 0.0 {
            continue;
        }
        let beta = (ONE + ONE) / vnorm2;
        a.col_mut(k)[k] = v0;
        for j in k + 1..cols {
            let (done, rest) = a.d.split_at_mut(j * rows);
            let vk = &done[k * rows + k..k * rows + rows];
            let cj = &mut rest[k..rows];
            let w = dot(vk, cj) * beta;
            for (ci, vi) in cj.iter_mut().zip(vk) {
                *ci -= w * *vi;
            }
        }
        {
            let vk = &a.col(k)[k..];
            let rj = &mut rhs[k..rows];
            let w = dot(vk, rj) * beta;
            for (ri, vi) in rj.iter_mut().zip(vk) {
                *ri -= w * *vi;
            }
        }
        a.col_mut(k)[k] = alpha;
    }
    let mut r = DdMat::zeros(cols, cols);
    for j in 0..cols {
        for i in 0..=j.min(cols - 1) {
            r.d[j * cols + i] = a.d[j * rows + i];
        }
    }
    r
}

/// One-sided Jacobi SVD of a square matrix: G -> U*S, accumulating V.
/// Returns singular values sorted non-increasing with matching columns.
fn jacobi_svd(g: &mut DdMat, v: &mut DdMat) -> Vec<TwoFloat> {
    let n = g.cols;
    let tol = TwoFloat::from(1e-31);
    let mut sq: Vec<TwoFloat> = (0..n).map(|j| dot(g.col(j), g.col(j))).collect();
    for _sweep in 0..40 {
        let mut rotated = 0usize;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = {
                    let (lo, hi) = g.d.split_at(q * g.rows);
                    dot(&lo[p * g.rows..p * g.rows + g.rows], &hi[..g.rows])
                };
                let gate = tol * tol * sq[p] * sq[q];
                if (apq * apq) <= gate || apq.hi() == 0.0 {
                    continue;
                }
                rotated += 1;
                let tau = (sq[q] - sq[p]) / (apq * 2.0);
                let t = {
                    let den = tau.abs() + (ONE + tau * tau).sqrt();
                    let mag = ONE / den;
                    if tau.hi() >= 0.0 {
                        mag
                    } else {
                        -mag
                    }
                };
                let c = ONE / (ONE + t * t).sqrt();
                let s = t * c;
                sq[p] -= t * apq;
                sq[q] += t * apq;
                rotate_pair(g, p, q, c, s);
                rotate_pair(v, p, q, c, s);
            }
        }
        if rotated == 0 {
            break;
        }
    }
    let mut sig: Vec<TwoFloat> = sq
        .iter()
        .map(|x| if x.hi() > 0.0 { x.sqrt() } else { ZERO })
        .collect();
    // Sort columns by descending singular value.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sig[j].hi().total_cmp(&sig[i].hi()));
    let gs = permute_cols(g, &order);
    let vs = permute_cols(v, &order);
    *g = gs;
    *v = vs;
    sig = order.iter().map(|&i| sig[i]).collect();
    sig
}

fn rotate_pair(m: &mut DdMat, p: usize, q: usize, c: TwoFloat, s: TwoFloat) {
    let rows = m.rows;
    let (lo, hi) = if p < q {
        let (a, b) = m.d.split_at_mut(q * rows);
        (&mut a[p * rows..p * rows + rows], &mut b[..rows])
    } else {
        unreachable!()
    };
    for (gp, gq) in lo.iter_mut().zip(hi.iter_mut()) {
        let np = c * *gp - s * *gq;
        let nq = s * *gp + c * *gq;
        *gp = np;
        *gq = nq;
    }
}

fn permute_cols(m: &DdMat, order: &[usize]) -> DdMat {
    let mut out = DdMat::zeros(m.rows, m.cols);
    for (dst, &src) in order.iter().enumerate() {
        out.col_mut(dst).copy_from_slice(m.col(src));
    }
    out
}

/// Result of the extended-precision truncated solve.
pub(crate) struct ExtendedSolution {
    /// Coefficients as (hi, lo) double-double pairs.
    pub alphas: Vec<(f64, f64)>,
    /// Singular values of the design matrix, non-increasing.
    pub singulars: Vec<f64>,
    pub discarded: usize,
}

/// Truncated-SVD minimum-norm solve of the continuation system in
/// double-double arithmetic. `v64` preconditions the Jacobi stage with the
/// double-precision right singular vectors, so it converges in a few sweeps.
pub(crate) fn solve_extended(
    points: &[f64],
    rhs_values: &[Complex64],
    modes: usize,
    b: f64,
    complex_system: bool,
    xi: f64,
    mode: XiMode,
    v64: &DMatrix<f64>,
) -> Result<ExtendedSolution> {
    let n = points.len();
    let cols = if complex_system { 2 * modes } else { modes };
    if 2 * n < cols {
        return Err(Error::Underdetermined {
            need: cols,
            got: 2 * n,
            modes,
        });
    }
    let mut a = design_matrix_dd(points, modes, b, complex_system);
    let mut rhs: Vec<TwoFloat> = rhs_values
        .iter()
        .map(|v| TwoFloat::from(v.re))
        .chain(rhs_values.iter().map(|v| TwoFloat::from(v.im)))
        .collect();
    let g = qr_in_place(&mut a, &mut rhs);
    drop(a);
    let qtb = &rhs[..cols];

    // Precondition: G <- R * V64, V <- V64 (then Jacobi keeps V consistent).
    debug_assert_eq!(v64.nrows(), cols);
    let p = v64.ncols().min(cols);
    let mut gp = DdMat::zeros(cols, cols);
    let mut v = DdMat::zeros(cols, cols);
    for j in 0..cols {
        if j < p {
            for i in 0..cols {
                v.d[j * cols + i] = TwoFloat::from(v64[(i, j)]);
            }
            for i in 0..cols {
                let mut s = ZERO;
                for (k, gcol) in (0..cols).map(|k| (k, g.col(k))) {
                    s += gcol[i] * v64[(k, j)];
                }
                gp.d[j * cols + i] = s;
            }
        } else {
            // Degenerate thin factor; fall back to the identity direction.
            v.d[j * cols + j] = ONE;
            gp.col_mut(j).copy_from_slice(g.col(j));
        }
    }
    drop(g);

    let sig = jacobi_svd(&mut gp, &mut v);
    let sigma_max = sig.first().map(|s| s.hi()).unwrap_or(0.0);
    if sigma_max == 0.0 {
        return Err(Error::RankZero {
            count: cols,
            xi,
        });
    }
    let cut = match mode {
        XiMode::Relative => xi * sigma_max,
        XiMode::Absolute => xi,
    };

    let mut alphas = vec![ZERO; cols];
    let mut kept = 0usize;
    for j in 0..cols {
        let s = sig[j];
        if s.hi() < cut || s.hi() == 0.0 {
            continue;
        }
        kept += 1;
        // u_j^T qtb = (g_j / sigma_j)^T qtb; coefficient = u_j^T qtb / sigma_j.
        let coeff = dot(gp.col(j), qtb) / (s * s);
        for (ai, vi) in alphas.iter_mut().zip(v.col(j)) {
            *ai += coeff * *vi;
        }
    }
    if kept == 0 {
        return Err(Error::RankZero { count: cols, xi });
    }
    Ok(ExtendedSolution {
        alphas: alphas.iter().map(|a| (a.hi(), a.lo())).collect(),
        singulars: sig.iter().map(|s| s.hi()).collect(),
        discarded: cols - kept,
    })
}

/// Evaluates sum_k alpha_k e^{-2 pi i k x / b} with double-double
/// coefficients and phase recursion; rounds the result to f64.
pub(crate) fn evaluate_dd(hi_parts: &[f64], lo_parts: &[f64], b: f64, x: f64) -> Complex64 {
    let (sn, cs) = phase_step(x, b).sin_cos();
    let mut tre = ONE;
    let mut tim = ZERO;
    let mut acc_re = ZERO;
    let mut acc_im = ZERO;
    for (&hi, &lo) in hi_parts.iter().zip(lo_parts) {
        let re = tre * cs - tim * sn;
        let im = tre * sn + tim * cs;
        tre = re;
        tim = im;
        let a = TwoFloat::new_add(hi, lo);
        acc_re += a * re;
        acc_im += a * im;
    }
    Complex64::new(acc_re.hi(), acc_im.hi())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn qr_matches_small_system() {
        // 3x2 system with known least-squares solution.
        let pts = [0.1, 0.2, 0.3];
        let mut a = design_matrix_dd(&pts, 2, 2.0, false);
        let rows = a.rows;
        let a64 = DMatrix::from_fn(rows, 2, |i, j| a.d[j * rows + i].hi());
        let mut rhs: Vec<TwoFloat> = (0..rows).map(|i| TwoFloat::from(i as f64 * 0.5)).collect();
        let rhs64: Vec<f64> = rhs.iter().map(|x| x.hi()).collect();
        let r = qr_in_place(&mut a, &mut rhs);
        // R^T R should equal A^T A.
        let ata = a64.transpose() * &a64;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    s += r.d[i * 2 + k].hi() * r.d[j * 2 + k].hi();
                }
                assert!((s - ata[(i, j)]).abs() < 1e-12);
            }
        }
        // ||Q^T b|| preserved.
        let n1: f64 = rhs.iter().map(|x| x.hi() * x.hi()).sum::<f64>();
        let n2: f64 = rhs64.iter().map(|x| x * x).sum::<f64>();
        assert!((n1 - n2).abs() < 1e-12);
    }

    #[test]
    fn jacobi_recovers_diagonal() {
        let mut g = DdMat::zeros(2, 2);
        g.d[0] = TwoFloat::from(3.0);
        g.d[3] = TwoFloat::from(1.0);
        let mut v = DdMat::zeros(2, 2);
        v.d[0] = ONE;
        v.d[3] = ONE;
        let sig = jacobi_svd(&mut g, &mut v);
        assert!((sig[0].hi() - 3.0).abs() < 1e-28);
        assert!((sig[1].hi() - 1.0).abs() < 1e-28);
    }
}
