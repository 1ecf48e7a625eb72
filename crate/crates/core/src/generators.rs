//! Analytic test-case generators, causality-violation injectors, and the
//! FFT-based periodic Hilbert transform used as an independent oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectrum::{RescaledResponse, SampledResponse};

/// Two-pole transfer function H(w) = r/(iw+s) + conj(r)/(iw+conj(s)).
/// With the defaults the poles sit at -2+i and 2+i (upper half plane), so H
/// is causal.
#[derive(Debug, Clone, Copy)]
pub struct TwoPoleParams {
    pub r: Complex64,
    pub s: Complex64,
    pub w_max: f64,
}

impl Default for TwoPoleParams {
    fn default() -> Self {
        Self {
            r: Complex64::new(1.0, 3.0),
            s: Complex64::new(1.0, 2.0),
            w_max: 6.0,
        }
    }
}

/// Gaussian impulse response h(t) = exp(-(t - t_d)^2 / (2 sigma^2)) in the
/// frequency domain: H(w, t_d) = exp(-2 (pi w sigma)^2 - 2 i pi w t_d).
///
/// `sigma` and `t_d` are in nanoseconds with `w_max` in Hz, so the
/// dimensionless products match sigma = 2 against w_max = 3.6e8 Hz.
#[derive(Debug, Clone, Copy)]
pub struct DelayedGaussianParams {
    pub sigma: f64,
    pub t_d: f64,
    pub w_max: f64,
}

impl Default for DelayedGaussianParams {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            t_d: 0.0,
            w_max: 3.6e8,
        }
    }
}

impl DelayedGaussianParams {
    /// Sets the delay as a multiple of sigma (t_d = gamma * sigma).
    pub fn with_delay_ratio(mut self, gamma: f64) -> Self {
        self.t_d = gamma * self.sigma;
        self
    }
}

/// Uniform RLGC transmission line segment, per-unit-length parameters in
/// ohm/cm, H/cm, S/cm, F/cm, length in cm.
#[derive(Debug, Clone, Copy)]
pub struct LineParams {
    pub r: f64,
    pub l: f64,
    pub g: f64,
    pub c: f64,
    pub length: f64,
    pub z_ref: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for LineParams {
    fn default() -> Self {
        Self {
            r: 0.8,
            l: 4.73e-9,
            g: 0.0,
            c: 3.8e-12,
            length: 10.0,
            z_ref: 50.0,
            w_min: 5e9 / 1000.0,
            w_max: 5e9,
        }
    }
}

/// Equispaced grid on [0, w_max] inclusive of both endpoints.
pub fn baseband_grid(w_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| w_max * j as f64 / (n - 1) as f64).collect()
}

/// Equispaced grid on (0, w_max]: w_j = j * w_max / n, j = 1..n.
pub fn bandpass_grid(w_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|j| w_max * j as f64 / n as f64).collect()
}

pub fn two_pole(p: &TwoPoleParams, freqs: &[f64]) -> Result<SampledResponse> {
    let values: Vec<Complex64> = freqs
        .iter()
        .map(|&w| {
            let iw = Complex64::new(0.0, w);
            p.r / (iw + p.s) + p.r.conj() / (iw + p.s.conj())
        })
        .collect();
    SampledResponse::new(freqs.to_vec(), values, 0.0, p.w_max)
}

pub fn delayed_gaussian(p: &DelayedGaussianParams, freqs: &[f64]) -> Result<SampledResponse> {
    // Frequencies in Hz, sigma and t_d in ns.
    let values: Vec<Complex64> = freqs
        .iter()
        .map(|&w| {
            let wn = w * 1e-9;
            let mag = (-2.0 * (PI * wn * p.sigma).powi(2)).exp();
            Complex64::from_polar(mag, -2.0 * PI * wn * p.t_d)
        })
        .collect();
    SampledResponse::new(freqs.to_vec(), values, 0.0, p.w_max)
}

/// S11 of a uniform line in reference impedance z_ref, from the closed-form
/// ABCD-to-S conversion of the two-port:
/// S11 = ((Z0^2 - zr^2) sinh(gl)) / (2 Z0 zr cosh(gl) + (Z0^2 + zr^2) sinh(gl))
/// with gamma = sqrt((R + iwL)(G + iwC)), Re gamma >= 0, and omega = 2 pi f.
pub fn transmission_line_s11(p: &LineParams, freqs: &[f64]) -> Result<SampledResponse> {
    let mut values = Vec::with_capacity(freqs.len());
    for &f in freqs {
        if f <= 0.0 {
            return Err(Error::InvalidBand {
                w_min: f,
                w_max: p.w_max,
            });
        }
        let omega = 2.0 * PI * f;
        let zs = Complex64::new(p.r, omega * p.l); // series impedance per cm
        let yp = Complex64::new(p.g, omega * p.c); // shunt admittance per cm
        let mut gamma = (zs * yp).sqrt();
        if gamma.re < 0.0 {
            gamma = -gamma;
        }
        let z0 = (zs / yp).sqrt();
        let gl = gamma * p.length;
        let sinh = gl.sinh();
        let cosh = gl.cosh();
        let zr = Complex64::new(p.z_ref, 0.0);
        let s11 = ((z0 * z0 - zr * zr) * sinh) / (2.0 * z0 * zr * cosh + (z0 * z0 + zr * zr) * sinh);
        values.push(s11);
    }
    let w_min = freqs.first().copied().unwrap_or(p.w_min);
    let w_max = freqs.last().copied().unwrap_or(p.w_max).max(p.w_max);
    SampledResponse::new(freqs.to_vec(), values, w_min, w_max)
}

/// Default standard deviation of the Gaussian violation (support ~1e-2).
pub const GAUSSIAN_VIOLATION_SIGMA: f64 = 1e-2 / 6.0;

/// Adds a localized non-causal Gaussian bump a*exp(-(|x|-x0)^2/(2 sigma_x^2))
/// to Re H, mirrored so the real part stays even. Im H is unchanged.
pub fn add_gaussian_violation(
    data: &RescaledResponse,
    a: f64,
    x0: f64,
    sigma_x: f64,
) -> RescaledResponse {
    let mut out = data.clone();
    for (x, v) in out.points.iter().zip(out.values.iter_mut()) {
        let d = x.abs() - x0;
        v.re += a * (-d * d / (2.0 * sigma_x * sigma_x)).exp();
    }
    out
}

/// Adds a*cos(2 pi cycles x) to Re H (even, so symmetry is preserved).
pub fn add_cosine_violation(data: &RescaledResponse, a: f64, cycles: f64) -> RescaledResponse {
    let mut out = data.clone();
    for (x, v) in out.points.iter().zip(out.values.iter_mut()) {
        v.re += a * (2.0 * PI * cycles * x).cos();
    }
    out
}

/// Periodic Hilbert transform of a real b-periodic function sampled on a
/// uniform grid over one period (even count): multiplication by -i*sgn(m) on
/// the signed DFT modes e^{+2 pi i m x / b}, with the mean and Nyquist modes
/// annihilated. Test oracle for the causal-pair identity.
pub fn periodic_hilbert(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    assert!(n >= 2 && n % 2 == 0, "uniform grid with even count required");
    let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    buf[0] = Complex64::new(0.0, 0.0);
    buf[n / 2] = Complex64::new(0.0, 0.0);
    for (m, v) in buf.iter_mut().enumerate().skip(1) {
        if m == n / 2 {
            continue;
        }
        let sign = if m < n / 2 { 1.0 } else { -1.0 };
        *v *= Complex64::new(0.0, -sign);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|v| v.re / n as f64).collect()
}
