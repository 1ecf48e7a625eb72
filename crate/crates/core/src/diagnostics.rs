//! Error-bound ingredients (Lambda1, Lambda2, K), smoothness estimation,
//! the resolution-halving sweep and the final causality verdict.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;

use crate::continuation::{self, ContinuationConfig, ReconstructionError};
use crate::error::{Error, Result};
use crate::lsq_svd::{SvdFactors, XiMode};
use crate::spectrum::{symmetrize, RescaledResponse};

/// Spike threshold relative to the median pointwise error.
pub const LOCALITY_FACTOR: f64 = 5.0;
/// Minimum spike separation in grid steps.
pub const MIN_SPIKE_SEPARATION: usize = 2;
/// Verdict truncation floor is `TRUNCATION_FLOOR_FACTOR * cutoff * max|H|`,
/// where cutoff is the absolute singular-value threshold the fit applied.
/// Measured reconstruction floors on causal reference cases run 10-1000x
/// the cutoff, so the factor carries headroom above that range.
pub const TRUNCATION_FLOOR_FACTOR: f64 = 2000.0;
/// A sweep "levels off" when the error changes by less than this factor
/// across two successive decimation levels.
pub const LEVELING_FACTOR: f64 = 2.0;
/// A localized spike is decisive on its own when the peak exceeds the median
/// pointwise error by this factor; clean fits concentrate error too, but
/// measured peak/median ratios on causal references stay below 5.
pub const SIGNIFICANT_SPIKE_RATIO: f64 = 20.0;
/// Spikes below `SPIKE_FLOOR_FACTOR * cutoff * max|H|` are indistinguishable
/// from structured truncation noise and never drive a verdict.
pub const SPIKE_FLOOR_FACTOR: f64 = 10.0;

/// Data-independent coefficients of the reconstruction error bound.
#[derive(Debug, Clone)]
pub struct BoundCoefficients {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Number of discarded singular values.
    pub discarded: usize,
    /// Lambda1 * sqrt(K / b).
    pub coef_truncation: f64,
    /// Lambda2 * sqrt(N (M - K)).
    pub coef_amplification: f64,
    /// Plain L2(Omega) norms of the right-singular-vector functions v_j.
    pub v_norms: Vec<f64>,
}

/// L2 norm of v_j(x) = sum_k V[k][j] phi_k(x) over a union of intervals,
/// computed by composite trapezoid quadrature resolving the shortest basis
/// wavelength b/M with at least 10 points.
pub fn v_function_norms(
    v: &DMatrix<f64>,
    modes: usize,
    b: f64,
    intervals: &[(f64, f64)],
) -> Vec<f64> {
    let cols = v.ncols();
    let mut sq = vec![0.0f64; cols];
    for &(lo, hi) in intervals {
        if hi <= lo {
            continue;
        }
        let wavelength = b / modes as f64;
        let n_q = (((hi - lo) / wavelength * 10.0).ceil() as usize).max(16);
        let h = (hi - lo) / n_q as f64;
        // Evaluate all v_j on the quadrature grid at once: v = (C + iS) V.
        let mut cosm = DMatrix::zeros(n_q + 1, modes);
        let mut sinm = DMatrix::zeros(n_q + 1, modes);
        for i in 0..=n_q {
            let x = lo + i as f64 * h;
            for k in 0..modes {
                let phase = -TAU * (k + 1) as f64 * x / b;
                cosm[(i, k)] = phase.cos();
                sinm[(i, k)] = phase.sin();
            }
        }
        let re = cosm * v;
        let im = sinm * v;
        for j in 0..cols {
            let mut acc = 0.0;
            for i in 0..=n_q {
                let m = re[(i, j)] * re[(i, j)] + im[(i, j)] * im[(i, j)];
                let w = if i == 0 || i == n_q { 0.5 } else { 1.0 };
                acc += w * m;
            }
            sq[j] += acc * h;
        }
    }
    sq.iter().map(|s| s.sqrt()).collect()
}

/// Trapezoid quadrature weights for points spread over disjoint intervals:
/// consecutive points closer than `break_gap` share a segment; each segment
/// gets standard composite-trapezoid weights.
fn trapezoid_weights(points: &[f64], break_gap: f64) -> Vec<f64> {
    let n = points.len();
    let mut w = vec![0.0f64; n];
    let mut start = 0;
    for i in 0..n {
        let segment_ends = i + 1 == n || points[i + 1] - points[i] > break_gap;
        if segment_ends {
            for j in start..=i {
                if j > start {
                    let h = (points[j] - points[j - 1]) / 2.0;
                    w[j - 1] += h;
                    w[j] += h;
                }
            }
            start = i + 1;
        }
    }
    w
}

/// Computes Lambda1, Lambda2 and the bound coefficients from the design
/// matrix factorization (real formulation, V is M x M).
///
/// Omega is reconstructed from the collocation points: the hull
/// [min, max] minus the symmetric bandpass gap (-a, a) when present.
///
/// Lambda1 integrates the discarded v_j over Omega with a fine quadrature:
/// discarded vectors live mostly in the extension zone and their small
/// Omega content is what the truncation term measures.
///
/// Lambda2 instead uses the discrete L2(Omega) norm on the collocation grid
/// itself (trapezoid weights, density-normalized). The kept vectors near the
/// cutoff concentrate between/outside the collocation points, and only the
/// sampled mass is amplified by 1/sigma in the solve; the discrete norm is
/// also the reading under which Lambda2 stays O(1).
#[allow(clippy::too_many_arguments)]
pub fn bound_coefficients(
    fac: &SvdFactors,
    points_on_omega: &[f64],
    gap_halfwidth: f64,
    modes: usize,
    collocation_points: usize,
    b: f64,
    xi: f64,
    xi_mode: XiMode,
) -> BoundCoefficients {
    let lo = points_on_omega.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = points_on_omega
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let intervals: Vec<(f64, f64)> = if gap_halfwidth > 0.0 && lo < -gap_halfwidth {
        vec![(lo, -gap_halfwidth), (gap_halfwidth, hi)]
    } else {
        vec![(lo, hi)]
    };
    let omega_len: f64 = intervals.iter().map(|(l, h)| h - l).sum();

    let v_norms = v_function_norms(&fac.v, modes, b, &intervals);
    let discarded_idx = fac.discarded(xi, xi_mode);
    let discarded = discarded_idx.len();
    let is_discarded = |j: usize| discarded_idx.binary_search(&j).is_ok();

    let lambda1 = discarded_idx
        .iter()
        .map(|&j| v_norms[j])
        .fold(0.0, f64::max);
    let density = (collocation_points as f64 / omega_len.max(f64::MIN_POSITIVE)).sqrt();
    // |v_j(x_i)|^2 = sigma_j^2 (U[i][j]^2 + U[N+i][j]^2), so the discrete
    // norm over the grid comes straight out of the left singular vectors.
    let n_pts = points_on_omega.len();
    let break_gap = 4.0 * omega_len / (n_pts.max(2) as f64 - 1.0);
    let weights = trapezoid_weights(points_on_omega, break_gap);
    let lambda2 = (0..fac.singulars.len())
        .filter(|&j| !is_discarded(j) && fac.singulars[j] > 0.0)
        .map(|j| {
            let sq: f64 = (0..n_pts.min(fac.rows / 2))
                .map(|i| {
                    weights[i] * (fac.u[(i, j)].powi(2) + fac.u[(fac.rows / 2 + i, j)].powi(2))
                })
                .sum();
            sq.sqrt() * density
        })
        .fold(0.0, f64::max);

    let kept = fac.singulars.len() - discarded;
    let m_minus_k = modes.saturating_sub(discarded);
    BoundCoefficients {
        lambda1,
        lambda2,
        discarded,
        coef_truncation: lambda1 * (discarded as f64 / b).sqrt(),
        coef_amplification: lambda2
            * ((collocation_points * m_minus_k) as f64).sqrt()
            * if kept == 0 { 0.0 } else { 1.0 },
        v_norms,
    }
}

/// Upper bound on ||H - C(H + eps)||: the theorem's combined estimate.
pub fn error_bound(
    bc: &BoundCoefficients,
    fourier_error_sup: f64,
    noise_sup: f64,
    hhat_sup_ext: f64,
) -> f64 {
    (1.0 + bc.coef_amplification) * (fourier_error_sup + noise_sup)
        + bc.coef_truncation * hhat_sup_ext
}

/// Jackson-type bound on the best causal trigonometric approximation of a
/// k-times differentiable b-periodic function:
/// (pi/2) (b/pi)^k (1/(2M))^k ||H^(k)||_inf.
pub fn jackson_bound(modes: usize, b: f64, k_order: f64, deriv_sup: f64) -> f64 {
    PI / 2.0 * (b / PI).powf(k_order) * (1.0 / (2.0 * modes as f64)).powf(k_order) * deriv_sup
}

/// Power-law model eps_F ~ c_tilde * M^(1 - k) fitted in log-log space.
#[derive(Debug, Clone)]
pub struct SmoothnessFit {
    pub c_tilde: f64,
    pub k_order: f64,
    /// L2 norm of the log-space residuals.
    pub residual: f64,
    pub samples: Vec<(usize, f64)>,
}

impl SmoothnessFit {
    /// Extrapolates the fitted error model to a mode count.
    pub fn predict(&self, modes: usize) -> f64 {
        self.c_tilde * (modes as f64).powf(1.0 - self.k_order)
    }

    /// Fitted log-log slope (= 1 - k_order).
    pub fn slope(&self) -> f64 {
        1.0 - self.k_order
    }
}

/// Least-squares line through (ln M_i, ln e_i); k = 1 - slope.
pub fn smoothness_fit(samples: &[(usize, f64)]) -> Result<SmoothnessFit> {
    if samples.len() < 3 || samples.iter().any(|&(_, e)| !(e > 0.0)) {
        return Err(Error::SmoothnessFitInput);
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|&(m, _)| (m as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(SmoothnessFit {
        c_tilde: intercept.exp(),
        k_order: 1.0 - slope,
        residual,
        samples: samples.to_vec(),
    })
}

/// Refits on every-other-point decimations of the data with M halved per
/// level, returning (M_i, errors) sorted by increasing M. Stops early when a
/// level would have fewer than 8 points.
pub fn resolution_sweep(
    data: &RescaledResponse,
    cfg: &ContinuationConfig,
    levels: usize,
) -> Result<Vec<(usize, ReconstructionError)>> {
    if levels < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: levels,
        });
    }
    // Decimate the non-negative half and re-mirror, so each level stays
    // conjugate-symmetric regardless of parity.
    let half_idx: Vec<usize> = (0..data.len()).filter(|&i| data.points[i] >= 0.0).collect();
    let mut fine: Vec<usize> = half_idx;
    let mut out = Vec::new();
    for level in 0..levels {
        let modes = cfg.modes >> level;
        let half = RescaledResponse {
            points: fine.iter().map(|&i| data.points[i]).collect(),
            values: fine.iter().map(|&i| data.values[i]).collect(),
            gap_halfwidth: data.gap_halfwidth,
        };
        let level_data = symmetrize(&half)?;
        if level_data.len() < 8 || modes < 2 || level_data.len() < modes {
            break;
        }
        let level_cfg = ContinuationConfig {
            modes,
            ..cfg.clone()
        };
        let c = continuation::fit(&level_data, &level_cfg)?;
        out.push((modes, continuation::reconstruction_error(&level_data, &c)));

        // Every other point; odd counts retain both endpoints.
        fine = fine.iter().copied().step_by(2).collect();
    }
    out.reverse();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CausalWithinTolerance,
    ViolationsDetected,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::CausalWithinTolerance => "causal_within_tolerance",
            Verdict::ViolationsDetected => "violations_detected",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct CausalityReport {
    pub verdict: Verdict,
    /// Order of the reconstruction error norms at the finest level.
    pub violation_bound: f64,
    /// Points where the pointwise error exceeds the locality threshold.
    pub violation_locations: Vec<f64>,
    pub noise_estimate: Option<f64>,
    pub smoothness: Option<SmoothnessFit>,
    pub errors: ReconstructionError,
}

/// Localized spikes: pointwise max(|E_R|, |E_I|) at least `factor` times the
/// median, merged when closer than `min_sep` grid steps; returns peak
/// locations.
pub fn detect_spikes(errors: &ReconstructionError, factor: f64, min_sep: usize) -> Vec<f64> {
    let n = errors.points.len();
    if n == 0 {
        return Vec::new();
    }
    let mag: Vec<f64> = (0..n)
        .map(|i| errors.e_real[i].abs().max(errors.e_imag[i].abs()))
        .collect();
    let mut sorted = mag.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    if median <= 0.0 {
        return Vec::new();
    }
    let threshold = factor * median;

    let mut locations = Vec::new();
    let mut i = 0;
    while i < n {
        if mag[i] >= threshold {
            // Extend the cluster while points stay above threshold or within
            // the minimum separation.
            let mut peak = i;
            let mut j = i;
            let mut last_above = i;
            while j + 1 < n && (mag[j + 1] >= threshold || j + 1 - last_above < min_sep) {
                j += 1;
                if mag[j] >= threshold {
                    last_above = j;
                    if mag[j] > mag[peak] {
                        peak = j;
                    }
                }
            }
            locations.push(errors.points[peak]);
            i = j + 1;
        } else {
            i += 1;
        }
    }
    locations
}

/// Applies the verdict procedure to a resolution sweep.
///
/// `cutoff_abs` (the absolute singular-value threshold the fit applied, see
/// `FitDiagnostics::effective_cutoff`) and `data_scale` (max |H|) set the
/// truncation floor below which reconstruction errors are indistinguishable
/// from the regularization.
pub fn verdict(
    sweep: &[(usize, ReconstructionError)],
    errors_full: ReconstructionError,
    known_noise: Option<f64>,
    cutoff_abs: f64,
    data_scale: f64,
) -> CausalityReport {
    let norms: Vec<f64> = sweep.iter().map(|(_, e)| e.max_abs()).collect();
    let finest = norms.last().copied().unwrap_or(errors_full.max_abs());
    let floor = TRUNCATION_FLOOR_FACTOR * cutoff_abs * data_scale;
    let threshold = known_noise.unwrap_or(0.0).max(floor);

    let spikes = detect_spikes(&errors_full, LOCALITY_FACTOR, MIN_SPIKE_SEPARATION);
    let peak = errors_full.max_abs();
    let spike_ratio = {
        let np = errors_full.points.len();
        let mut mags: Vec<f64> = (0..np)
            .map(|i| errors_full.e_real[i].abs().max(errors_full.e_imag[i].abs()))
            .collect();
        mags.sort_by(f64::total_cmp);
        let median = if np == 0 { 0.0 } else { mags[np / 2] };
        if median > 0.0 {
            peak / median
        } else {
            0.0
        }
    };
    let significant_spikes = !spikes.is_empty()
        && spike_ratio >= SIGNIFICANT_SPIKE_RATIO
        && peak > SPIKE_FLOOR_FACTOR * cutoff_abs * data_scale;

    let n = norms.len();
    let leveled = n >= 3
        && norms[n - 1] > 0.0
        && norms[n - 3] / norms[n - 1] < LEVELING_FACTOR
        && norms[n - 2] / norms[n - 1] < LEVELING_FACTOR;

    let smoothness = {
        let l2: Vec<(usize, f64)> = sweep
            .iter()
            .filter(|(_, e)| e.l2_real > 0.0)
            .map(|(m, e)| (*m, e.l2_real))
            .collect();
        smoothness_fit(&l2).ok()
    };

    let (verdict, noise_estimate) = if significant_spikes {
        // A sharp localized peak far above both the background and the
        // truncation level is a violation regardless of the global norm.
        (Verdict::ViolationsDetected, if leveled { Some(finest) } else { known_noise })
    } else if finest <= threshold {
        (Verdict::CausalWithinTolerance, known_noise)
    } else if leveled {
        (Verdict::ViolationsDetected, Some(finest))
    } else if !spikes.is_empty() && finest > threshold {
        (Verdict::ViolationsDetected, None)
    } else {
        (Verdict::Inconclusive, known_noise)
    };

    CausalityReport {
        verdict,
        violation_bound: finest,
        violation_locations: spikes,
        noise_estimate,
        smoothness,
        errors: errors_full,
    }
}
