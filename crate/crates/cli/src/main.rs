//! Command-line causality checker for tabulated frequency responses.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use causalfc::continuation::{
    self, ContinuationConfig, Formulation, Precision, DEFAULT_B, DEFAULT_XI,
};
use causalfc::diagnostics::{self, CausalityReport, Verdict};
use causalfc::generators::{
    self, DelayedGaussianParams, LineParams, TwoPoleParams, GAUSSIAN_VIOLATION_SIGMA,
};
use causalfc::lsq_svd::{self, XiMode};
use causalfc::spectrum::{self, RescaledResponse, SampledResponse};
use causalfc::touchstone;

const B_SWEEP_CANDIDATES: [f64; 5] = [1.1, 1.5, 2.0, 3.0, 4.0];
const SWEEP_LEVELS: usize = 3;

#[derive(Parser)]
#[command(name = "causalfc", version, about = "Causality verification of bandlimited frequency responses via causal Fourier continuations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a tabulated response for causality and emit a verdict.
    Check(CheckArgs),
    /// Generate analytic test data, optionally with an injected violation.
    Generate(GenerateArgs),
    /// Print reconstruction errors across a resolution sweep.
    Sweep(CheckArgs),
    /// Time the SVD, solve, and full continuation across mode counts.
    Bench,
}

#[derive(Args)]
struct CheckArgs {
    /// Input file: Touchstone (.sNp) or CSV (x,re,im).
    #[arg(long)]
    input: PathBuf,
    /// Network element to check, as "i,j" (1-based).
    #[arg(long, default_value = "1,1")]
    port: String,
    /// Number of causal Fourier modes M; default floor(N_sym/2).
    #[arg(long)]
    modes: Option<usize>,
    /// Extension period b, 1 < b <= 4; when omitted, the best of
    /// {1.1, 1.5, 2, 3, 4} is selected automatically.
    #[arg(long)]
    extension: Option<f64>,
    /// Singular-value truncation tolerance.
    #[arg(long, default_value_t = DEFAULT_XI)]
    xi: f64,
    /// Whether xi is relative to sigma_1 or an absolute cutoff.
    #[arg(long, value_enum, default_value_t = XiModeArg::Relative)]
    xi_mode: XiModeArg,
    #[arg(long, value_enum, default_value_t = FormulationArg::Real)]
    formulation: FormulationArg,
    /// Solver arithmetic; extended pushes the floor below 1e-12 but is slow.
    #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
    precision: PrecisionArg,
    /// Try b in {1.1, 1.5, 2, 3, 4} and keep the best fit.
    #[arg(long)]
    b_sweep: bool,
    /// Write the verdict report as key,value CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write per-point reconstruction errors as CSV.
    #[arg(long)]
    errors_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum XiModeArg {
    Relative,
    Absolute,
}

impl From<XiModeArg> for XiMode {
    fn from(v: XiModeArg) -> Self {
        match v {
            XiModeArg::Relative => XiMode::Relative,
            XiModeArg::Absolute => XiMode::Absolute,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(v: PrecisionArg) -> Self {
        match v {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Real,
    Complex,
}

impl From<FormulationArg> for Formulation {
    fn from(v: FormulationArg) -> Self {
        match v {
            FormulationArg::Real => Formulation::RealSystem,
            FormulationArg::Complex => Formulation::ComplexSystem,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Which analytic case to tabulate.
    #[arg(value_enum)]
    kind: GeneratorKind,
    /// Number of frequency samples.
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Output path; .csv selects CSV, anything else Touchstone.
    #[arg(long, short)]
    output: PathBuf,
    /// Delay in multiples of sigma (delayed-gaussian only).
    #[arg(long, default_value_t = 6.0)]
    td_over_sigma: f64,
    /// Amplitude of an injected localized Gaussian violation in Re H.
    #[arg(long)]
    violation_a: Option<f64>,
    /// Center of the violation on the rescaled axis x in (0, 0.5).
    #[arg(long, default_value_t = 0.1)]
    violation_x0: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    TwoPole,
    DelayedGaussian,
    Line,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("CAUSALFC_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let result = match cli.command {
        Command::Check(args) => cmd_check(&args),
        Command::Generate(args) => cmd_generate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Bench => cmd_bench(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn parse_port(spec: &str) -> Result<(usize, usize), String> {
    let mut it = spec.split(',');
    let (Some(i), Some(j), None) = (it.next(), it.next(), it.next()) else {
        return Err(format!("port must be \"i,j\", got \"{spec}\""));
    };
    let i: usize = i.trim().parse().map_err(|_| format!("bad port index \"{i}\""))?;
    let j: usize = j.trim().parse().map_err(|_| format!("bad port index \"{j}\""))?;
    Ok((i, j))
}

fn load_response(path: &Path, port: (usize, usize)) -> Result<SampledResponse, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    if ext == "csv" {
        return touchstone::parse_response_csv(&text).map_err(|e| e.to_string());
    }
    // Touchstone: .sNp encodes the port count in the extension.
    let n_ports = ext
        .strip_prefix('s')
        .and_then(|rest| rest.strip_suffix('p'))
        .and_then(|n| n.parse::<usize>().ok());
    let net = touchstone::parse_touchstone_with_ports(&text, n_ports).map_err(|e| e.to_string())?;
    touchstone::extract_element(&net, port.0, port.1).map_err(|e| e.to_string())
}

fn prepare(resp: &SampledResponse) -> Result<RescaledResponse, String> {
    let half = spectrum::rescale(resp).map_err(|e| e.to_string())?;
    spectrum::symmetrize(&half).map_err(|e| e.to_string())
}

struct Analysis {
    report: CausalityReport,
    cutoff_abs: f64,
    b_used: f64,
    modes: usize,
}

fn analyze(data: &RescaledResponse, args: &CheckArgs) -> Result<Analysis, String> {
    let modes = args
        .modes
        .unwrap_or_else(|| ContinuationConfig::default_modes(data.len()));
    let b0 = args.extension.unwrap_or(DEFAULT_B);
    let mut cfg = ContinuationConfig::new(modes, b0).map_err(|e| e.to_string())?;
    cfg.xi = args.xi;
    cfg.xi_mode = args.xi_mode.into();
    cfg.formulation = args.formulation.into();
    cfg.precision = args.precision.into();

    if args.b_sweep || args.extension.is_none() {
        let best = B_SWEEP_CANDIDATES
            .par_iter()
            .map(|&b| {
                let trial = ContinuationConfig { b, ..cfg.clone() };
                let err = continuation::fit(data, &trial)
                    .map(|c| continuation::reconstruction_error(data, &c).max_abs())
                    .unwrap_or(f64::INFINITY);
                (b, err)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((b, err)) = best {
            println!("b-sweep selected b={b} (max error {err:.3e})");
            cfg.b = b;
        }
    }

    let fitted = continuation::fit(data, &cfg).map_err(|e| e.to_string())?;
    let errors = continuation::reconstruction_error(data, &fitted);
    let cutoff_abs = fitted.diagnostics.effective_cutoff;
    let sweep = diagnostics::resolution_sweep(data, &cfg, SWEEP_LEVELS).map_err(|e| e.to_string())?;
    let report = diagnostics::verdict(&sweep, errors, None, cutoff_abs, data.max_abs());
    Ok(Analysis {
        report,
        cutoff_abs,
        b_used: cfg.b,
        modes,
    })
}

fn report_text(analysis: &Analysis, args: &CheckArgs) -> String {
    let mut out = String::from("key,value\n");
    out.push_str(&format!("input,{}\n", args.input.display()));
    out.push_str(&format!("port,{}\n", args.port.replace(',', ";")));
    out.push_str(&format!("modes,{}\n", analysis.modes));
    out.push_str(&format!("extension_b,{}\n", analysis.b_used));
    out.push_str(&format!("xi,{:e}\n", args.xi));
    out.push_str(&format!(
        "xi_mode,{}\n",
        match args.xi_mode {
            XiModeArg::Relative => "relative",
            XiModeArg::Absolute => "absolute",
        }
    ));
    out.push_str(&format!(
        "formulation,{}\n",
        match args.formulation {
            FormulationArg::Real => "real",
            FormulationArg::Complex => "complex",
        }
    ));
    out.push_str(&format!("effective_cutoff,{:e}\n", analysis.cutoff_abs));
    // Skip the duplicate header of the report body.
    let body = touchstone::write_report_csv(&analysis.report);
    out.push_str(body.split_once('\n').map(|(_, rest)| rest).unwrap_or(""));
    out
}

fn cmd_check(args: &CheckArgs) -> Result<u8, String> {
    let port = parse_port(&args.port)?;
    let resp = load_response(&args.input, port)?;
    let data = prepare(&resp)?;
    let analysis = analyze(&data, args)?;
    let report = &analysis.report;

    println!("verdict: {}", report.verdict);
    println!("violation bound: {:.3e}", report.violation_bound);
    if let Some(noise) = report.noise_estimate {
        println!("noise estimate: {noise:.3e}");
    }
    if !report.violation_locations.is_empty() {
        let locs: Vec<String> = report
            .violation_locations
            .iter()
            .map(|x| format!("{x:.4}"))
            .collect();
        println!("violation locations (rescaled x): {}", locs.join(", "));
    }

    if let Some(path) = &args.report {
        fs::write(path, report_text(&analysis, args))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    if let Some(path) = &args.errors_csv {
        fs::write(path, touchstone::write_errors_csv(&report.errors))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }

    Ok(match report.verdict {
        Verdict::CausalWithinTolerance => 0,
        Verdict::ViolationsDetected => 2,
        Verdict::Inconclusive => 3,
    })
}

fn cmd_sweep(args: &CheckArgs) -> Result<u8, String> {
    let port = parse_port(&args.port)?;
    let resp = load_response(&args.input, port)?;
    let data = prepare(&resp)?;
    let modes = args
        .modes
        .unwrap_or_else(|| ContinuationConfig::default_modes(data.len()));
    let mut cfg = ContinuationConfig::new(modes, args.extension.unwrap_or(DEFAULT_B))
        .map_err(|e| e.to_string())?;
    cfg.xi = args.xi;
    cfg.xi_mode = args.xi_mode.into();
    cfg.formulation = args.formulation.into();
    cfg.precision = args.precision.into();
    let sweep = diagnostics::resolution_sweep(&data, &cfg, SWEEP_LEVELS).map_err(|e| e.to_string())?;
    println!("{:>8} {:>14} {:>14}", "M", "max_error", "l2_error");
    for (m, err) in &sweep {
        println!(
            "{m:>8} {:>14.3e} {:>14.3e}",
            err.max_abs(),
            err.l2_real.hypot(err.l2_imag)
        );
    }
    Ok(0)
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8, String> {
    let resp = match args.kind {
        GeneratorKind::TwoPole => {
            let p = TwoPoleParams::default();
            generators::two_pole(&p, &generators::baseband_grid(p.w_max, args.n))
        }
        GeneratorKind::DelayedGaussian => {
            let p = DelayedGaussianParams::default().with_delay_ratio(args.td_over_sigma);
            generators::delayed_gaussian(&p, &generators::baseband_grid(p.w_max, args.n))
        }
        GeneratorKind::Line => {
            let p = LineParams::default();
            let span = p.w_max - p.w_min;
            let freqs: Vec<f64> = (0..args.n)
                .map(|j| p.w_min + span * j as f64 / (args.n - 1).max(1) as f64)
                .collect();
            generators::transmission_line_s11(&p, &freqs)
        }
    }
    .map_err(|e| e.to_string())?;

    // A violation is specified on the rescaled axis; the perturbed values map
    // back onto the original frequency grid unchanged.
    let resp = if let Some(a) = args.violation_a {
        let half = spectrum::rescale(&resp).map_err(|e| e.to_string())?;
        let bumped =
            generators::add_gaussian_violation(&half, a, args.violation_x0, GAUSSIAN_VIOLATION_SIGMA);
        SampledResponse::new(resp.freqs.clone(), bumped.values, resp.w_min, resp.w_max)
            .map_err(|e| e.to_string())?
    } else {
        resp
    };

    let ext = args
        .output
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let text = if ext == "csv" {
        touchstone::write_response_csv(&resp)
    } else {
        touchstone::write_touchstone_1port(&resp, 50.0)
    };
    fs::write(&args.output, text)
        .map_err(|e| format!("cannot write {}: {e}", args.output.display()))?;
    println!("wrote {} samples to {}", resp.freqs.len(), args.output.display());
    Ok(0)
}

fn cmd_bench() -> Result<u8, String> {
    println!(
        "{:>6} {:>6} {:>12} {:>12} {:>12}",
        "N", "M", "svd_s", "solve_s", "total_s"
    );
    for &m in &[50usize, 100, 250, 500] {
        let n = 2 * m;
        let p = TwoPoleParams::default();
        let resp = generators::two_pole(&p, &generators::bandpass_grid(p.w_max, n))
            .map_err(|e| e.to_string())?;
        let data = prepare(&resp)?;
        let mut cfg = ContinuationConfig::new(m, DEFAULT_B).map_err(|e| e.to_string())?;
        cfg.precision = Precision::Double;

        let t0 = Instant::now();
        let a = continuation::design_matrix(&data.points, m, cfg.b, cfg.formulation);
        let fac = lsq_svd::svd(&a).map_err(|e| e.to_string())?;
        let svd_s = t0.elapsed().as_secs_f64();

        let rhs = continuation::stack_rhs(&data.values);
        let t1 = Instant::now();
        lsq_svd::solve_min_norm_mode(&fac, &rhs, cfg.xi, cfg.xi_mode).map_err(|e| e.to_string())?;
        let solve_s = t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let c = continuation::fit(&data, &cfg).map_err(|e| e.to_string())?;
        continuation::reconstruction_error(&data, &c);
        let total_s = t2.elapsed().as_secs_f64();

        println!("{n:>6} {m:>6} {svd_s:>12.3e} {solve_s:>12.3e} {total_s:>12.3e}");
    }
    Ok(0)
}
