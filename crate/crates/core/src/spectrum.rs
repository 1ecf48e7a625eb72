//! Tabulated frequency responses and the rescaling / symmetrization steps
//! applied before a causal continuation is fitted.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative tolerance on |Im H(0)| when mirroring a spectrum.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKind {
    /// Data available from DC.
    Baseband,
    /// Data available only from a nonzero low-frequency cutoff.
    Bandpass,
}

/// Discrete samples of a transfer function H(w) on [w_min, w_max].
#[derive(Debug, Clone)]
pub struct SampledResponse {
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub w_min: f64,
    pub w_max: f64,
    pub kind: BandKind,
}

impl SampledResponse {
    /// Validates and stores a tabulated response. `kind` is derived from
    /// `w_min`: bandpass iff w_min > 0.
    pub fn new(freqs: Vec<f64>, values: Vec<Complex64>, w_min: f64, w_max: f64) -> Result<Self> {
        if freqs.len() < 2 || freqs.len() != values.len() {
            return Err(Error::TooFewSamples {
                min: 2,
                got: freqs.len().min(values.len()),
            });
        }
        if !(w_max > 0.0) || w_min < 0.0 || w_min >= w_max {
            return Err(Error::InvalidBand { w_min, w_max });
        }
        for (i, win) in freqs.windows(2).enumerate() {
            if !(win[1] > win[0]) {
                return Err(Error::NonMonotoneFrequencies { index: i + 1 });
            }
        }
        for &w in &freqs {
            if w < w_min || w > w_max {
                return Err(Error::FrequencyOutOfBand {
                    value: w,
                    w_min,
                    w_max,
                });
            }
        }
        let kind = if w_min > 0.0 {
            BandKind::Bandpass
        } else {
            BandKind::Baseband
        };
        Ok(Self {
            freqs,
            values,
            w_min,
            w_max,
            kind,
        })
    }

    /// Largest sample magnitude; used for relative tolerances downstream.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// A response mapped onto the unit interval x in [-0.5, 0.5].
#[derive(Debug, Clone)]
pub struct RescaledResponse {
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    /// a = 0.5 * w_min / w_max; bandpass data leave the open gap (-a, a) empty.
    pub gap_halfwidth: f64,
}

impl RescaledResponse {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Maps [0, w_max] onto [0, 0.5] via x = 0.5 w / w_max. Values are copied
/// unchanged; the dispersion relations are homogeneous in frequency.
pub fn rescale(resp: &SampledResponse) -> Result<RescaledResponse> {
    if !(resp.w_max > 0.0) {
        return Err(Error::InvalidBand {
            w_min: resp.w_min,
            w_max: resp.w_max,
        });
    }
    if resp.freqs.is_empty() {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    let scale = 0.5 / resp.w_max;
    Ok(RescaledResponse {
        points: resp.freqs.iter().map(|&w| w * scale).collect(),
        values: resp.values.clone(),
        gap_halfwidth: 0.5 * resp.w_min / resp.w_max,
    })
}

/// Mirrors a half-spectrum onto [-0.5, 0.5] using conjugate symmetry:
/// H(-x) = conj(H(x)). A sample at x = 0 must be real (within tolerance)
/// and is not duplicated.
pub fn symmetrize(half: &RescaledResponse) -> Result<RescaledResponse> {
    symmetrize_with_tolerance(half, SYMMETRY_TOLERANCE)
}

pub fn symmetrize_with_tolerance(half: &RescaledResponse, tol: f64) -> Result<RescaledResponse> {
    let scale = half.max_abs().max(f64::MIN_POSITIVE);
    // Already-symmetric inputs pass through this filter unchanged modulo the
    // mirroring below, which makes the operation idempotent.
    let keep: Vec<usize> = (0..half.len()).filter(|&i| half.points[i] >= 0.0).collect();
    let mut points = Vec::with_capacity(2 * keep.len());
    let mut values = Vec::with_capacity(2 * keep.len());

    for &i in keep.iter().rev() {
        if half.points[i] > 0.0 {
            points.push(-half.points[i]);
            values.push(half.values[i].conj());
        }
    }
    for &i in &keep {
        if half.points[i] == 0.0 {
            let imag = half.values[i].im.abs();
            if imag > tol * scale {
                return Err(Error::NonRealAtZero {
                    imag,
                    tol: tol * scale,
                });
            }
            points.push(0.0);
            values.push(Complex64::new(half.values[i].re, 0.0));
        } else {
            points.push(half.points[i]);
            values.push(half.values[i]);
        }
    }

    Ok(RescaledResponse {
        points,
        values,
        gap_halfwidth: half.gap_halfwidth,
    })
}

/// Restricts a response to [w_min, new_wmax], updating the band edge.
pub fn restrict_to_band(resp: &SampledResponse, new_wmax: f64) -> Result<SampledResponse> {
    if !(new_wmax > resp.w_min) || new_wmax > resp.w_max {
        return Err(Error::InvalidBand {
            w_min: resp.w_min,
            w_max: new_wmax,
        });
    }
    let keep: Vec<usize> = (0..resp.freqs.len())
        .filter(|&i| resp.freqs[i] <= new_wmax)
        .collect();
    if keep.len() < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: keep.len(),
        });
    }
    SampledResponse::new(
        keep.iter().map(|&i| resp.freqs[i]).collect(),
        keep.iter().map(|&i| resp.values[i]).collect(),
        resp.w_min,
        new_wmax,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rescale_maps_endpoints_and_midpoint() {
        let resp =
            SampledResponse::new(vec![0.0, 3.0, 6.0], vec![c(1.0, 0.0); 3], 0.0, 6.0).unwrap();
        let r = rescale(&resp).unwrap();
        assert_eq!(r.points, vec![0.0, 0.25, 0.5]);
        assert_eq!(r.gap_halfwidth, 0.0);
        assert_eq!(r.values, resp.values);
    }

    #[test]
    fn rescale_rejects_bad_band() {
        assert!(SampledResponse::new(vec![0.0, 1.0], vec![c(1.0, 0.0); 2], 0.0, 0.0).is_err());
        assert!(SampledResponse::new(vec![], vec![], 0.0, 1.0).is_err());
    }

    #[test]
    fn symmetrize_conjugate_mirror() {
        let half = RescaledResponse {
            points: vec![0.25],
            values: vec![c(1.0, 2.0)],
            gap_halfwidth: 0.0,
        };
        let s = symmetrize(&half).unwrap();
        assert_eq!(s.points, vec![-0.25, 0.25]);
        assert_eq!(s.values, vec![c(1.0, -2.0), c(1.0, 2.0)]);
    }

    #[test]
    fn symmetrize_keeps_single_zero_point() {
        // Two-pole H(0) = r/s + conj(r/s) = 2.8.
        let half = RescaledResponse {
            points: vec![0.0],
            values: vec![c(2.8, 0.0)],
            gap_halfwidth: 0.0,
        };
        let s = symmetrize(&half).unwrap();
        assert_eq!(s.points, vec![0.0]);
        assert_eq!(s.values, vec![c(2.8, 0.0)]);
    }

    #[test]
    fn symmetrize_rejects_complex_dc() {
        let half = RescaledResponse {
            points: vec![0.0],
            values: vec![c(1.0, 0.5)],
            gap_halfwidth: 0.0,
        };
        assert!(matches!(
            symmetrize(&half),
            Err(Error::NonRealAtZero { .. })
        ));
    }

    #[test]
    fn symmetrize_is_idempotent() {
        let half = RescaledResponse {
            points: vec![0.0, 0.1, 0.3],
            values: vec![c(2.0, 0.0), c(1.0, -0.5), c(0.5, 0.25)],
            gap_halfwidth: 0.0,
        };
        let once = symmetrize(&half).unwrap();
        let twice = symmetrize(&once).unwrap();
        assert_eq!(once.points, twice.points);
        assert_eq!(once.values, twice.values);
    }

    #[test]
    fn symmetrize_output_has_even_real_odd_imag() {
        let half = RescaledResponse {
            points: vec![0.1, 0.2, 0.5],
            values: vec![c(1.0, 2.0), c(-0.5, 0.3), c(0.2, -0.1)],
            gap_halfwidth: 0.0,
        };
        let s = symmetrize(&half).unwrap();
        let n = s.len();
        for i in 0..n {
            let j = n - 1 - i;
            assert_eq!(s.points[i], -s.points[j]);
            assert_eq!(s.values[i].re, s.values[j].re);
            assert_eq!(s.values[i].im, -s.values[j].im);
        }
    }

    #[test]
    fn restrict_band_filters_and_updates_wmax() {
        let freqs: Vec<f64> = (1..=100).map(|i| i as f64 * 5e7).collect(); // (0, 5] GHz
        let values = vec![c(0.5, 0.1); 100];
        let resp = SampledResponse::new(freqs, values, 5e7, 5e9).unwrap();
        let cut = restrict_to_band(&resp, 1e9).unwrap();
        assert_eq!(cut.w_max, 1e9);
        assert!(cut.freqs.iter().all(|&w| w <= 1e9));
        assert_eq!(cut.freqs.len(), 20);

        let same = restrict_to_band(&resp, 5e9).unwrap();
        assert_eq!(same.freqs.len(), resp.freqs.len());

        assert!(restrict_to_band(&resp, 6e7).is_err());
    }
}
