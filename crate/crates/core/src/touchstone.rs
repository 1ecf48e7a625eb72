//! Touchstone v1 and CSV ingestion/serialization.
//!
//! Everything is converted to Hz and real/imaginary parts at the boundary;
//! the rest of the crate never sees units or angle formats.

use num_complex::Complex64;

use crate::continuation::ReconstructionError;
use crate::diagnostics::CausalityReport;
use crate::error::{Error, Result};
use crate::spectrum::SampledResponse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterKind {
    S,
    Y,
    Z,
}

impl std::fmt::Display for ParameterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ParameterKind::S => "S",
            ParameterKind::Y => "Y",
            ParameterKind::Z => "Z",
        })
    }
}

/// An n-port network sampled at discrete frequencies.
#[derive(Debug, Clone)]
pub struct NetworkData {
    pub n_ports: usize,
    /// Hz, strictly increasing.
    pub freqs: Vec<f64>,
    /// Row-major n x n matrix per frequency.
    pub matrices: Vec<Vec<Complex64>>,
    pub parameter_kind: ParameterKind,
    pub z_ref: f64,
}

#[derive(Debug, Clone, Copy)]
enum ValueFormat {
    Ri,
    Ma,
    Db,
}

impl ValueFormat {
    fn to_complex(self, a: f64, b: f64) -> Complex64 {
        match self {
            ValueFormat::Ri => Complex64::new(a, b),
            ValueFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            ValueFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses Touchstone v1 text, inferring the port count from the first data
/// block (ambiguous 9-token lines are read as 2-port; pass the count from
/// the file extension via [`parse_touchstone_with_ports`] to override).
pub fn parse_touchstone(text: &str) -> Result<NetworkData> {
    parse_touchstone_with_ports(text, None)
}

pub fn parse_touchstone_with_ports(text: &str, n_ports: Option<usize>) -> Result<NetworkData> {
    let mut unit_scale = 1e9; // Touchstone default GHz
    let mut kind = ParameterKind::S;
    let mut format = ValueFormat::Ma;
    let mut z_ref = 50.0;
    let mut saw_option = false;

    // (value, source line) stream of all data tokens.
    let mut tokens: Vec<(f64, usize)> = Vec::new();
    let mut first_data_line_tokens = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('!') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if saw_option {
                return Err(parse_err(line_no, "duplicate option line"));
            }
            saw_option = true;
            let mut it = rest.split_whitespace().peekable();
            while let Some(tok) = it.next() {
                match tok.to_ascii_uppercase().as_str() {
                    "HZ" => unit_scale = 1.0,
                    "KHZ" => unit_scale = 1e3,
                    "MHZ" => unit_scale = 1e6,
                    "GHZ" => unit_scale = 1e9,
                    "S" => kind = ParameterKind::S,
                    "Y" => kind = ParameterKind::Y,
                    "Z" => kind = ParameterKind::Z,
                    "RI" => format = ValueFormat::Ri,
                    "MA" => format = ValueFormat::Ma,
                    "DB" => format = ValueFormat::Db,
                    "R" => {
                        let v = it.next().ok_or_else(|| {
                            parse_err(line_no, "option line: R without an impedance value")
                        })?;
                        z_ref = v.parse().map_err(|_| {
                            parse_err(line_no, format!("option line: bad impedance '{v}'"))
                        })?;
                    }
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("option line: unknown token '{other}'"),
                        ))
                    }
                }
            }
            continue;
        }
        let mut count = 0usize;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad numeric token '{tok}'")))?;
            tokens.push((v, line_no));
            count += 1;
        }
        if first_data_line_tokens == 0 {
            first_data_line_tokens = count;
        }
    }

    if tokens.is_empty() {
        return Err(parse_err(0, "no data rows"));
    }

    let n = match n_ports {
        Some(n) if n >= 1 => n,
        Some(_) => return Err(parse_err(0, "port count must be at least 1")),
        None => match first_data_line_tokens {
            3 => 1,
            9 => 2,
            t if t >= 3 && (t - 1) % 2 == 0 => (t - 1) / 2,
            t => {
                return Err(parse_err(
                    tokens[0].1,
                    format!("cannot infer port count from a {t}-token data line"),
                ))
            }
        },
    };
    let block = 1 + 2 * n * n;
    if tokens.len() % block != 0 {
        return Err(parse_err(
            tokens.last().unwrap().1,
            format!(
                "inconsistent column count: {} values do not divide into {}-value blocks for {n} ports",
                tokens.len(),
                block
            ),
        ));
    }

    let mut freqs = Vec::new();
    let mut matrices = Vec::new();
    for chunk in tokens.chunks(block) {
        let (f, line_no) = chunk[0];
        let freq = f * unit_scale;
        if let Some(&last) = freqs.last() {
            if freq <= last {
                return Err(parse_err(line_no, "non-monotone frequency"));
            }
        }
        freqs.push(freq);
        let mut m = Vec::with_capacity(n * n);
        for pair in chunk[1..].chunks(2) {
            m.push(format.to_complex(pair[0].0, pair[1].0));
        }
        // Touchstone stores 2-port data column-major (S11 S21 S12 S22).
        if n == 2 {
            m.swap(1, 2);
        }
        matrices.push(m);
    }

    Ok(NetworkData {
        n_ports: n,
        freqs,
        matrices,
        parameter_kind: kind,
        z_ref,
    })
}

/// Extracts element (i, j), 1-based, as a scalar response. Bandpass iff the
/// first frequency is positive.
pub fn extract_element(net: &NetworkData, i: usize, j: usize) -> Result<SampledResponse> {
    if i < 1 || j < 1 || i > net.n_ports || j > net.n_ports {
        return Err(Error::PortOutOfRange {
            i,
            j,
            n_ports: net.n_ports,
        });
    }
    let idx = (i - 1) * net.n_ports + (j - 1);
    let values: Vec<Complex64> = net.matrices.iter().map(|m| m[idx]).collect();
    let w_min = if net.freqs[0] > 0.0 { net.freqs[0] } else { 0.0 };
    let w_max = *net.freqs.last().unwrap();
    SampledResponse::new(net.freqs.clone(), values, w_min, w_max)
}

/// Writes a 1-port Touchstone v1 file (# Hz S RI).
pub fn write_touchstone_1port(resp: &SampledResponse, z_ref: f64) -> String {
    let mut out = String::new();
    out.push_str(&format!("# Hz S RI R {z_ref}\n"));
    for (w, v) in resp.freqs.iter().zip(&resp.values) {
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", w, v.re, v.im));
    }
    out
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with header `x,re,im` plus band metadata comments; round-trips
/// bit-exactly through [`parse_response_csv`].
pub fn write_response_csv(resp: &SampledResponse) -> String {
    let mut out = String::new();
    out.push_str(&format!("# w_min,{}\n", fmt(resp.w_min)));
    out.push_str(&format!("# w_max,{}\n", fmt(resp.w_max)));
    out.push_str("x,re,im\n");
    for (w, v) in resp.freqs.iter().zip(&resp.values) {
        out.push_str(&format!("{},{},{}\n", fmt(*w), fmt(v.re), fmt(v.im)));
    }
    out
}

pub fn parse_response_csv(text: &str) -> Result<SampledResponse> {
    let mut w_min: Option<f64> = None;
    let mut w_max: Option<f64> = None;
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.trim().splitn(2, ',');
            let key = parts.next().unwrap_or("").trim();
            let val = parts.next().unwrap_or("").trim();
            match key {
                "w_min" => {
                    w_min = Some(val.parse().map_err(|_| {
                        parse_err(line_no, format!("bad w_min value '{val}'"))
                    })?)
                }
                "w_max" => {
                    w_max = Some(val.parse().map_err(|_| {
                        parse_err(line_no, format!("bad w_max value '{val}'"))
                    })?)
                }
                _ => {}
            }
            continue;
        }
        if !saw_header {
            if line != "x,re,im" {
                return Err(parse_err(line_no, "expected header 'x,re,im'"));
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(line_no, "expected 3 columns"));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad numeric value '{s}'")))
        };
        freqs.push(parse(cols[0])?);
        values.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
    }
    let w_max = w_max.unwrap_or_else(|| freqs.last().copied().unwrap_or(0.0));
    let w_min = w_min.unwrap_or_else(|| if freqs.first().is_some_and(|&f| f > 0.0) {
        freqs[0]
    } else {
        0.0
    });
    SampledResponse::new(freqs, values, w_min, w_max)
}

/// Per-point reconstruction errors, header `x,e_re,e_im`.
pub fn write_errors_csv(err: &ReconstructionError) -> String {
    let mut out = String::from("x,e_re,e_im\n");
    for i in 0..err.points.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt(err.points[i]),
            fmt(err.e_real[i]),
            fmt(err.e_imag[i])
        ));
    }
    out
}

/// Key/value report serialization; locations are semicolon separated and the
/// column stays empty when no violations were localized.
pub fn write_report_csv(report: &CausalityReport) -> String {
    let mut out = String::from("key,value\n");
    out.push_str(&format!("verdict,{}\n", report.verdict));
    out.push_str(&format!("violation_bound,{}\n", fmt(report.violation_bound)));
    out.push_str(&format!(
        "noise_estimate,{}\n",
        report.noise_estimate.map(fmt).unwrap_or_default()
    ));
    if let Some(s) = &report.smoothness {
        out.push_str(&format!("smoothness_c_tilde,{}\n", fmt(s.c_tilde)));
        out.push_str(&format!("smoothness_k_order,{}\n", fmt(s.k_order)));
        out.push_str(&format!("smoothness_residual,{}\n", fmt(s.residual)));
    } else {
        out.push_str("smoothness_c_tilde,\nsmoothness_k_order,\nsmoothness_residual,\n");
    }
    out.push_str(&format!("max_e_real,{}\n", fmt(report.errors.max_real)));
    out.push_str(&format!("max_e_imag,{}\n", fmt(report.errors.max_imag)));
    out.push_str(&format!("l2_e_real,{}\n", fmt(report.errors.l2_real)));
    out.push_str(&format!("l2_e_imag,{}\n", fmt(report.errors.l2_imag)));
    let locations: Vec<String> = report
        .violation_locations
        .iter()
        .map(|&x| fmt(x))
        .collect();
    out.push_str(&format!("violation_locations,{}\n", locations.join(";")));
    out
}
