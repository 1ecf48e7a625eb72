//! Causal Fourier continuations: design matrix, regularized fit, evaluation
//! and reconstruction errors.
//!
//! A causal continuation uses only positive-index modes
//! phi_k(x) = exp(-2 pi i k x / b), k = 1..M, which are eigenfunctions of the
//! periodic Hilbert transform. Causality therefore holds by construction and
//! the quality of the fit on the original interval is what gets diagnosed.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extended;
use crate::lsq_svd::{self, SvdFactors, XiMode};
use crate::spectrum::RescaledResponse;

/// Default truncation tolerance for the regularized SVD solve.
pub const DEFAULT_XI: f64 = 1e-13;
/// Default extension period.
pub const DEFAULT_B: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// 2N x M real system stacking Re and Im rows; alpha real by construction.
    #[default]
    RealSystem,
    /// N x M complex system carried as its 2N x 2M real representation.
    ComplexSystem,
}

/// Arithmetic used for the truncated-SVD solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Plain f64. Fast, but the reconstruction floor stalls near
    /// eps * sigma_1 * ||alpha||, around 1e-12 for hard fits.
    Double,
    /// Double-double factorization and solve (see [`crate::extended`]);
    /// pushes the floor to the truncation level itself.
    #[default]
    Extended,
}

/// Parameters governing one continuation fit.
#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    /// Number of causal Fourier modes M.
    pub modes: usize,
    /// Extension period b, 1 < b <= 4.
    pub b: f64,
    pub xi: f64,
    pub xi_mode: XiMode,
    pub formulation: Formulation,
    pub precision: Precision,
}

impl ContinuationConfig {
    pub fn new(modes: usize, b: f64) -> Result<Self> {
        if !(b > 1.0 && b <= 4.0) {
            return Err(Error::InvalidPeriod(b));
        }
        Ok(Self {
            modes,
            b,
            xi: DEFAULT_XI,
            xi_mode: XiMode::Relative,
            formulation: Formulation::RealSystem,
            precision: Precision::Extended,
        })
    }

    /// Default mode count for a symmetrized point set: M = floor(N/2),
    /// following the N = 2M overcollocation guidance.
    pub fn default_modes(n_points: usize) -> usize {
        (n_points / 2).max(1)
    }
}

/// Per-fit diagnostics retained alongside the coefficients.
#[derive(Debug, Clone)]
pub struct FitDiagnostics {
    pub singular_values: Vec<f64>,
    /// Number of singular values discarded by the truncated solve.
    pub discarded: usize,
    /// Collocation point count the fit saw.
    pub collocation_points: usize,
    /// True when N < 2M (fit proceeded, but accuracy may suffer).
    pub undercollocated: bool,
    /// Relative norm of the imaginary parts recovered by the complex
    /// formulation; identically zero for the real formulation.
    pub coeff_imag_rel_norm: f64,
    /// Absolute singular-value cutoff the solve actually applied
    /// (xi itself in absolute mode, xi * sigma_1 in relative mode).
    pub effective_cutoff: f64,
}

/// A fitted causal Fourier continuation, evaluable anywhere.
#[derive(Debug, Clone)]
pub struct CausalContinuation {
    /// Real coefficients alpha_1..alpha_M.
    pub alphas: Vec<f64>,
    /// Low-order halves of the coefficients when fitted in extended
    /// precision; empty for a double-precision fit.
    pub alphas_lo: Vec<f64>,
    pub b: f64,
    pub diagnostics: FitDiagnostics,
}

impl CausalContinuation {
    /// C(H)(x) = sum_k alpha_k exp(-2 pi i k x / b).
    ///
    /// An extended-precision fit is also evaluated in extended precision:
    /// rounding the coefficients to f64 first would reintroduce evaluation
    /// noise of order eps * ||alpha||_1, swamping sub-1e-12 residuals.
    pub fn evaluate_at(&self, x: f64) -> Complex64 {
        if self.alphas_lo.len() == self.alphas.len() && !self.alphas.is_empty() {
            return extended::evaluate_dd(&self.alphas, &self.alphas_lo, self.b, x);
        }
        let step = Complex64::from_polar(1.0, -TAU * x / self.b);
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for &alpha in &self.alphas {
            term *= step;
            acc += alpha * term;
        }
        acc
    }

    pub fn evaluate(&self, points: &[f64]) -> Vec<Complex64> {
        points.iter().map(|&x| self.evaluate_at(x)).collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.alphas.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }
}

/// Builds the real design matrix for the chosen formulation.
///
/// RealSystem: 2N x M with A[j][k] = Re phi_k(x_j) and
/// A[N+j][k] = Im phi_k(x_j).
/// ComplexSystem: 2N x 2M real representation of the complex N x M system,
/// unknowns ordered (Re alpha, Im alpha).
pub fn design_matrix(points: &[f64], modes: usize, b: f64, formulation: Formulation) -> DMatrix<f64> {
    let n = points.len();
    match formulation {
        Formulation::RealSystem => {
            let mut a = DMatrix::zeros(2 * n, modes);
            fill_basis(&mut a, points, modes, b, 0, 0);
            a
        }
        Formulation::ComplexSystem => {
            // [Re A, -Im A; Im A, Re A] acting on (Re alpha, Im alpha).
            let mut a = DMatrix::zeros(2 * n, 2 * modes);
            for (j, &x) in points.iter().enumerate() {
                let step = Complex64::from_polar(1.0, -TAU * x / b);
                let mut term = Complex64::new(1.0, 0.0);
                for k in 0..modes {
                    term *= step;
                    a[(j, k)] = term.re;
                    a[(j, modes + k)] = -term.im;
                    a[(n + j, k)] = term.im;
                    a[(n + j, modes + k)] = term.re;
                }
            }
            a
        }
    }
}

fn fill_basis(a: &mut DMatrix<f64>, points: &[f64], modes: usize, b: f64, row0: usize, col0: usize) {
    let n = points.len();
    for (j, &x) in points.iter().enumerate() {
        let step = Complex64::from_polar(1.0, -TAU * x / b);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..modes {
            term *= step;
            a[(row0 + j, col0 + k)] = term.re;
            a[(row0 + n + j, col0 + k)] = term.im;
        }
    }
}

/// Stacks the right-hand side (Re H; Im H) matching `design_matrix` rows.
pub fn stack_rhs(values: &[Complex64]) -> Vec<f64> {
    values
        .iter()
        .map(|v| v.re)
        .chain(values.iter().map(|v| v.im))
        .collect()
}

/// Fits a causal Fourier continuation to symmetrized data by truncated-SVD
/// least squares. Keeps the factorization diagnostics for the error bounds.
pub fn fit(data: &RescaledResponse, cfg: &ContinuationConfig) -> Result<CausalContinuation> {
    let (c, _) = fit_with_factors(data, cfg)?;
    Ok(c)
}

/// Like [`fit`] but also returns the design-matrix SVD, which the
/// diagnostics module reuses for the bound coefficients.
pub fn fit_with_factors(
    data: &RescaledResponse,
    cfg: &ContinuationConfig,
) -> Result<(CausalContinuation, SvdFactors)> {
    let n = data.len();
    if n < cfg.modes {
        return Err(Error::Underdetermined {
            need: cfg.modes,
            got: n,
            modes: cfg.modes,
        });
    }
    if !(cfg.b > 1.0 && cfg.b <= 4.0) {
        return Err(Error::InvalidPeriod(cfg.b));
    }
    if !(cfg.xi > 0.0 && cfg.xi < 1.0) {
        return Err(Error::InvalidXi(cfg.xi));
    }
    let a = design_matrix(&data.points, cfg.modes, cfg.b, cfg.formulation);
    let fac = lsq_svd::svd(&a)?;

    // The coefficients, their (hi, lo) split, the singular values the
    // truncation actually saw, and the discard count.
    let (coeffs, coeffs_lo, singulars, discarded) = match cfg.precision {
        Precision::Double => {
            let rhs = stack_rhs(&data.values);
            let sol = lsq_svd::solve_min_norm_mode(&fac, &rhs, cfg.xi, cfg.xi_mode)?;
            (sol.coeffs, Vec::new(), fac.singulars.clone(), sol.discarded)
        }
        Precision::Extended => {
            let sol = extended::solve_extended(
                &data.points,
                &data.values,
                cfg.modes,
                cfg.b,
                cfg.formulation == Formulation::ComplexSystem,
                cfg.xi,
                cfg.xi_mode,
                &fac.v,
            )?;
            let (hi, lo): (Vec<f64>, Vec<f64>) = sol.alphas.iter().copied().unzip();
            (hi, lo, sol.singulars, sol.discarded)
        }
    };
    let sigma_max = singulars.first().copied().unwrap_or(0.0);
    let effective_cutoff = match cfg.xi_mode {
        XiMode::Relative => cfg.xi * sigma_max,
        XiMode::Absolute => cfg.xi,
    };

    let (alphas, alphas_lo, imag_rel) = match cfg.formulation {
        Formulation::RealSystem => (coeffs, coeffs_lo, 0.0),
        Formulation::ComplexSystem => {
            let (re, im) = coeffs.split_at(cfg.modes);
            let nre: f64 = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            let nim: f64 = im.iter().map(|c| c * c).sum::<f64>().sqrt();
            let lo = if coeffs_lo.is_empty() {
                Vec::new()
            } else {
                coeffs_lo[..cfg.modes].to_vec()
            };
            (re.to_vec(), lo, if nre > 0.0 { nim / nre } else { 0.0 })
        }
    };

    let diagnostics = FitDiagnostics {
        singular_values: singulars,
        discarded,
        collocation_points: n,
        undercollocated: n < 2 * cfg.modes,
        coeff_imag_rel_norm: imag_rel,
        effective_cutoff,
    };
    Ok((
        CausalContinuation {
            alphas,
            alphas_lo,
            b: cfg.b,
            diagnostics,
        },
        fac,
    ))
}

/// Pointwise reconstruction errors E_R, E_I on the original interval.
#[derive(Debug, Clone)]
pub struct ReconstructionError {
    pub points: Vec<f64>,
    pub e_real: Vec<f64>,
    pub e_imag: Vec<f64>,
    pub max_real: f64,
    pub max_imag: f64,
    pub l2_real: f64,
    pub l2_imag: f64,
}

impl ReconstructionError {
    pub fn max_abs(&self) -> f64 {
        self.max_real.max(self.max_imag)
    }
}

/// E_R(x_j) = Re H(x_j) - Re C(H)(x_j), E_I likewise, evaluated on the data
/// points only (never in the extension zone).
pub fn reconstruction_error(data: &RescaledResponse, c: &CausalContinuation) -> ReconstructionError {
    let mut e_real = Vec::with_capacity(data.len());
    let mut e_imag = Vec::with_capacity(data.len());
    for (x, v) in data.points.iter().zip(&data.values) {
        let approx = c.evaluate_at(*x);
        e_real.push(v.re - approx.re);
        e_imag.push(v.im - approx.im);
    }
    let max_real = e_real.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let max_imag = e_imag.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let l2_real = e_real.iter().map(|e| e * e).sum::<f64>().sqrt();
    let l2_imag = e_imag.iter().map(|e| e * e).sum::<f64>().sqrt();
    ReconstructionError {
        points: data.points.clone(),
        e_real,
        e_imag,
        max_real,
        max_imag,
        l2_real,
        l2_imag,
    }
}
