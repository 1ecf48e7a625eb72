//! Minimum-norm least squares via truncated singular value decomposition.
//!
//! The continuation fit is extremely ill-conditioned by construction, so the
//! load-bearing requirement here is accurate singular values down to the
//! truncation threshold. The decomposition is delegated to faer, whose
//! divide-and-conquer SVD keeps small singular values accurate where a plain
//! Golub-Kahan iteration loses several digits on these design matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// How the truncation tolerance xi is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XiMode {
    /// Discard sigma_j < xi * sigma_1 (scale invariant).
    #[default]
    Relative,
    /// Discard sigma_j < xi.
    Absolute,
}

/// Full factorization A = U * Sigma * V^T (thin U).
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    /// Non-increasing, non-negative.
    pub singulars: Vec<f64>,
    /// cols x cols orthogonal; column j is the right singular vector v_j.
    pub v: DMatrix<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl SvdFactors {
    pub fn sigma_max(&self) -> f64 {
        self.singulars.first().copied().unwrap_or(0.0)
    }

    /// Indices of singular values discarded at the given tolerance.
    pub fn discarded(&self, xi: f64, mode: XiMode) -> Vec<usize> {
        let cut = match mode {
            XiMode::Relative => xi * self.sigma_max(),
            XiMode::Absolute => xi,
        };
        (0..self.singulars.len())
            .filter(|&j| self.singulars[j] < cut)
            .collect()
    }
}

/// Minimum-norm truncated solution of the factored least squares problem.
#[derive(Debug, Clone)]
pub struct TruncatedSolution {
    pub coeffs: Vec<f64>,
    /// Number of discarded singular values.
    pub discarded: usize,
    pub kept: usize,
}

/// Computes the SVD of a real matrix, singular values sorted non-increasing.
pub fn svd(a: &DMatrix<f64>) -> Result<SvdFactors> {
    for row in 0..a.nrows() {
        for col in 0..a.ncols() {
            if !a[(row, col)].is_finite() {
                return Err(Error::NonFiniteEntry { row, col });
            }
        }
    }
    if a.is_empty() {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    let rows = a.nrows();
    let cols = a.ncols();
    let m = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let f = m.thin_svd().map_err(|_| Error::SvdNoConvergence)?;
    let (fu, fs, fv) = (f.U(), f.S(), f.V());

    let p = fs.dim();
    let singulars: Vec<f64> = (0..p).map(|j| fs[j]).collect();
    let u = DMatrix::from_fn(rows, p, |i, j| fu[(i, j)]);
    let v = DMatrix::from_fn(cols, p, |i, j| fv[(i, j)]);

    Ok(SvdFactors {
        u,
        singulars,
        v,
        rows,
        cols,
    })
}

/// Minimum-norm least squares solution with relative thresholding,
/// discarding sigma_j < xi * sigma_1.
pub fn solve_min_norm(fac: &SvdFactors, rhs: &[f64], xi: f64) -> Result<TruncatedSolution> {
    solve_min_norm_mode(fac, rhs, xi, XiMode::Relative)
}

pub fn solve_min_norm_mode(
    fac: &SvdFactors,
    rhs: &[f64],
    xi: f64,
    mode: XiMode,
) -> Result<TruncatedSolution> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidXi(xi));
    }
    if rhs.len() != fac.rows {
        return Err(Error::RhsLengthMismatch {
            rhs_len: rhs.len(),
            rows: fac.rows,
        });
    }
    let cut = match mode {
        XiMode::Relative => xi * fac.sigma_max(),
        XiMode::Absolute => xi,
    };
    let p = fac.singulars.len();
    let b = DVector::from_column_slice(rhs);
    let mut coeffs = DVector::zeros(fac.cols);
    let mut kept = 0usize;
    for j in 0..p {
        let sigma = fac.singulars[j];
        // Ties sigma == cut are kept: strict less-than discards.
        if sigma < cut {
            continue;
        }
        kept += 1;
        let proj = fac.u.column(j).dot(&b) / sigma;
        coeffs.axpy(proj, &fac.v.column(j), 1.0);
    }
    if kept == 0 {
        return Err(Error::RankZero { count: p, xi });
    }
    Ok(TruncatedSolution {
        coeffs: coeffs.as_slice().to_vec(),
        discarded: p - kept,
        kept,
    })
}
