//! End-to-end acceptance gate: one numbered scenario per criterion, each
//! printing a single pass/fail line. Failures panic after printing.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use causalfc::continuation::{
    design_matrix, fit, reconstruction_error, CausalContinuation, ContinuationConfig,
    FitDiagnostics, Formulation, Precision,
};
use causalfc::diagnostics::{
    bound_coefficients, detect_spikes, resolution_sweep, v_function_norms, verdict,
    LOCALITY_FACTOR, MIN_SPIKE_SEPARATION,
};
use causalfc::generators::{
    add_cosine_violation, add_gaussian_violation, bandpass_grid, delayed_gaussian,
    periodic_hilbert, transmission_line_s11, two_pole, DelayedGaussianParams, LineParams,
    TwoPoleParams, GAUSSIAN_VIOLATION_SIGMA,
};
use causalfc::lsq_svd::{solve_min_norm, solve_min_norm_mode, svd};
use causalfc::spectrum::{rescale, symmetrize, RescaledResponse};
use causalfc::{Verdict, XiMode};

fn report(criterion: usize, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {tag} ({detail})");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Two-pole table mirrored on the negative axis: 2M samples of H on
/// (0, w_max], symmetrized to 4M points.
fn two_pole_data(half_points: usize) -> RescaledResponse {
    let p = TwoPoleParams::default();
    let resp = two_pole(&p, &bandpass_grid(p.w_max, half_points)).unwrap();
    symmetrize(&rescale(&resp).unwrap()).unwrap()
}

fn high_accuracy_config(modes: usize, b: f64) -> ContinuationConfig {
    let mut cfg = ContinuationConfig::new(modes, b).unwrap();
    cfg.xi = 1e-14;
    cfg.xi_mode = XiMode::Absolute;
    cfg
}

#[test]
fn criterion_01_two_pole_convergence_table() {
    let targets: &[(usize, f64)] = &[
        (10, 1e-1),
        (25, 4e-3),
        (50, 1e-4),
        (100, 1e-7),
        (200, 2e-13),
    ];
    let t0 = Instant::now();
    let mut detail = String::new();
    let mut pass = true;
    for &(m, target) in targets {
        let data = two_pole_data(2 * m);
        let c = fit(&data, &high_accuracy_config(m, 4.0)).unwrap();
        let err = reconstruction_error(&data, &c).max_abs();
        let ratio = err / target;
        pass &= (0.1..=10.0).contains(&ratio);
        detail.push_str(&format!("M={m}:{err:.1e} "));
    }
    let data = two_pole_data(500);
    let c = fit(&data, &high_accuracy_config(250, 4.0)).unwrap();
    let floor = reconstruction_error(&data, &c).max_abs();
    pass &= floor <= 1e-12;
    let elapsed = t0.elapsed();
    pass &= elapsed.as_secs_f64() <= 30.0;
    detail.push_str(&format!("M=250 floor:{floor:.1e} time:{elapsed:.1?}"));
    report(1, pass, &detail);
}

/// Largest pointwise error within `window` of +-x0 and the background median.
fn spike_profile(data: &RescaledResponse, c: &CausalContinuation, x0: f64, window: f64) -> (f64, f64) {
    let err = reconstruction_error(data, c);
    let mag: Vec<f64> = (0..data.len())
        .map(|i| err.e_real[i].abs().max(err.e_imag[i].abs()))
        .collect();
    let peak = data
        .points
        .iter()
        .zip(&mag)
        .filter(|(x, _)| (x.abs() - x0).abs() <= window)
        .map(|(_, m)| *m)
        .fold(0.0f64, f64::max);
    let mut sorted = mag;
    sorted.sort_by(f64::total_cmp);
    (peak, sorted[sorted.len() / 2])
}

#[test]
fn criterion_02_gaussian_violation_detection() {
    let clean = two_pole_data(500);
    let cfg = high_accuracy_config(250, 4.0);

    let small = add_gaussian_violation(&clean, 1e-10, 0.1, GAUSSIAN_VIOLATION_SIGMA);
    let c_small = fit(&small, &cfg).unwrap();
    let (peak_small, background) = spike_profile(&small, &c_small, 0.1, 0.02);
    let err_small = reconstruction_error(&small, &c_small);
    let spikes = detect_spikes(&err_small, LOCALITY_FACTOR, MIN_SPIKE_SEPARATION);
    let found_both = spikes.iter().any(|x| (x - 0.1).abs() <= 0.01)
        && spikes.iter().any(|x| (x + 0.1).abs() <= 0.01);

    let large = add_gaussian_violation(&clean, 1e-8, 0.1, GAUSSIAN_VIOLATION_SIGMA);
    let c_large = fit(&large, &cfg).unwrap();
    let (peak_large, _) = spike_profile(&large, &c_large, 0.1, 0.02);
    let scaling = peak_large / peak_small;

    let pass = (1e-12..=1e-9).contains(&peak_small)
        && peak_small / background >= 5.0
        && found_both
        && (30.0..=300.0).contains(&scaling);
    report(
        2,
        pass,
        &format!(
            "peak:{peak_small:.1e} bg:{background:.1e} ratio:{:.0} scale:{scaling:.0}x",
            peak_small / background
        ),
    );
}

#[test]
fn criterion_03_sensitivity_floor() {
    let clean = two_pole_data(500);
    let data = add_gaussian_violation(&clean, 1e-12, 0.1, GAUSSIAN_VIOLATION_SIGMA);
    let c = fit(&data, &high_accuracy_config(500, 4.0)).unwrap();
    let err = reconstruction_error(&data, &c);
    let spikes = detect_spikes(&err, 5.0, MIN_SPIKE_SEPARATION);
    let found = spikes.iter().any(|x| (x - 0.1).abs() <= 0.01)
        && spikes.iter().any(|x| (x + 0.1).abs() <= 0.01);
    let (peak, background) = spike_profile(&data, &c, 0.1, 0.02);
    let pass = found && peak / background >= 5.0;
    report(
        3,
        pass,
        &format!("a=1e-12 peak:{peak:.1e} bg:{background:.1e} spikes:{spikes:?}"),
    );
}

#[test]
fn criterion_04_noise_leveling() {
    let clean = two_pole_data(800);
    let data = add_cosine_violation(&clean, 1e-5, 10.0);
    let mut cfg = ContinuationConfig::new(400, 4.0).unwrap();
    cfg.precision = Precision::Double;
    let c = fit(&data, &cfg).unwrap();
    let err = reconstruction_error(&data, &c);
    let sweep = resolution_sweep(&data, &cfg, 4).unwrap();

    let fine: Vec<f64> = sweep
        .iter()
        .filter(|(m, _)| *m >= 100)
        .map(|(_, e)| e.max_abs())
        .collect();
    let in_band = fine.iter().all(|&e| (2e-6..=3e-5).contains(&e));
    let no_decay = fine.windows(2).all(|w| w[0] / w[1] < 2.0 && w[1] / w[0] < 2.0);

    let scale = data.max_abs();
    let rep = verdict(&sweep, err, None, c.diagnostics.effective_cutoff, scale);
    let noise_ok = rep
        .noise_estimate
        .map(|n| (2e-6..=3e-5).contains(&n))
        .unwrap_or(false);
    let pass = in_band && no_decay && rep.verdict == Verdict::ViolationsDetected && noise_ok;
    report(
        4,
        pass,
        &format!(
            "levels:{fine:?} verdict:{} noise:{:?}",
            rep.verdict, rep.noise_estimate
        ),
    );
}

fn gaussian_fit(gamma: f64) -> (RescaledResponse, CausalContinuation) {
    let p = DelayedGaussianParams::default().with_delay_ratio(gamma);
    let resp = delayed_gaussian(&p, &bandpass_grid(p.w_max, 250)).unwrap();
    let data = symmetrize(&rescale(&resp).unwrap()).unwrap();
    let mut cfg = ContinuationConfig::new(250, 2.0).unwrap();
    cfg.xi = 1e-14;
    cfg.xi_mode = XiMode::Absolute;
    let c = fit(&data, &cfg).unwrap();
    (data, c)
}

fn gaussian_verdict(data: &RescaledResponse, c: &CausalContinuation) -> Verdict {
    let mut cfg = ContinuationConfig::new(250, 2.0).unwrap();
    cfg.xi = 1e-14;
    cfg.xi_mode = XiMode::Absolute;
    let err = reconstruction_error(data, c);
    let sweep = resolution_sweep(data, &cfg, 3).unwrap();
    verdict(&sweep, err, None, c.diagnostics.effective_cutoff, data.max_abs()).verdict
}

#[test]
fn criterion_05_delayed_gaussian_discrimination() {
    let (data_nc, c_nc) = gaussian_fit(0.1);
    let err_nc = reconstruction_error(&data_nc, &c_nc).max_abs();
    let verdict_nc = gaussian_verdict(&data_nc, &c_nc);

    let (data_c, c_c) = gaussian_fit(6.0);
    let err_c = reconstruction_error(&data_c, &c_c).max_abs();
    let verdict_c = gaussian_verdict(&data_c, &c_c);

    let sweep_errs: Vec<f64> = [1.0, 2.0, 4.0, 5.0]
        .iter()
        .map(|&g| {
            let (d, c) = gaussian_fit(g);
            reconstruction_error(&d, &c).max_abs()
        })
        .collect();
    let decreasing = sweep_errs.windows(2).all(|w| w[1] < w[0]);

    let pass = err_nc >= 1e-4
        && verdict_nc != Verdict::CausalWithinTolerance
        && err_c <= 1e-12
        && verdict_c == Verdict::CausalWithinTolerance
        && decreasing;
    report(
        5,
        pass,
        &format!(
            "t_d=0.1s:{err_nc:.1e}/{verdict_nc} t_d=6s:{err_c:.1e}/{verdict_c} sweep:{sweep_errs:?}"
        ),
    );
}

#[test]
fn criterion_06_transmission_line() {
    let mut p = LineParams::default();
    p.w_max = 1e9;
    let resp = transmission_line_s11(&p, &bandpass_grid(p.w_max, 250)).unwrap();
    let data = symmetrize(&rescale(&resp).unwrap()).unwrap();
    let mut cfg = ContinuationConfig::new(250, 4.0).unwrap();
    cfg.xi = 1e-15;
    cfg.xi_mode = XiMode::Absolute;
    let c = fit(&data, &cfg).unwrap();
    let err = reconstruction_error(&data, &c);
    let max_err = err.max_abs();
    let sweep = resolution_sweep(&data, &cfg, 3).unwrap();
    let rep = verdict(&sweep, err, None, c.diagnostics.effective_cutoff, data.max_abs());
    let pass = max_err <= 1e-12 && rep.verdict == Verdict::CausalWithinTolerance;
    report(6, pass, &format!("maxE:{max_err:.1e} verdict:{}", rep.verdict));
}

#[test]
fn criterion_07_causal_pair_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x07);
    let b = 2.0;
    let n_grid = 512;
    let xs: Vec<f64> = (0..n_grid)
        .map(|j| -b / 2.0 + b * j as f64 / n_grid as f64)
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let m = rng.gen_range(1..=64);
        let alphas: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let max_alpha = alphas.iter().map(|a| a.abs()).fold(0.0, f64::max);
        let c = CausalContinuation {
            alphas,
            alphas_lo: vec![],
            b,
            diagnostics: FitDiagnostics {
                singular_values: vec![],
                discarded: 0,
                collocation_points: 0,
                undercollocated: false,
                coeff_imag_rel_norm: 0.0,
                effective_cutoff: 0.0,
            },
        };
        let vals = c.evaluate(&xs);
        let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
        let hre = periodic_hilbert(&re);
        let resid = vals
            .iter()
            .zip(&hre)
            .map(|(v, h)| (v.im + h).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(resid / max_alpha.max(f64::MIN_POSITIVE));
    }
    report(7, worst <= 1e-12, &format!("max |Im C + H[Re C]|/max|alpha| = {worst:.1e}"));
}

#[test]
fn criterion_08_solver_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x08);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rows = rng.gen_range(6..=20);
        let cols = rng.gen_range(2..=rows.min(8));
        let a = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
        let rhs: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fac = svd(&a).unwrap();
        if fac.singulars.last().copied().unwrap_or(0.0) < 1e-3 * fac.sigma_max() {
            continue; // keep only well-conditioned draws
        }
        let sol = solve_min_norm(&fac, &rhs, 1e-13).unwrap();
        let ata = a.transpose() * &a;
        let atb = a.transpose() * DVector::from_column_slice(&rhs);
        let x = ata.lu().solve(&atb).unwrap();
        let num = (DVector::from_column_slice(&sol.coeffs) - &x).norm();
        worst = worst.max(num / x.norm().max(f64::MIN_POSITIVE));
    }
    report(8, worst <= 1e-8, &format!("max relative deviation {worst:.1e}"));
}

#[test]
fn criterion_09_bound_coefficient_ranges() {
    let xi = 1e-13;
    let mut pass = true;
    let mut detail = String::new();
    for &m in &[50usize, 100, 250] {
        let n = 2 * m;
        let points: Vec<f64> = (0..n).map(|j| -0.5 + j as f64 / (n - 1) as f64).collect();
        let a = design_matrix(&points, m, 2.0, Formulation::RealSystem);
        let fac = svd(&a).unwrap();
        let bc = bound_coefficients(&fac, &points, 0.0, m, n, 2.0, xi, XiMode::Relative);
        let cap = 10.0 * xi * fac.sigma_max();
        pass &= bc.coef_truncation >= 0.0 && bc.coef_truncation <= cap;
        pass &= (0.2..=5.0).contains(&bc.lambda2);
        detail.push_str(&format!(
            "M={m}: trunc={:.1e} (cap {cap:.1e}) L2={:.2} ",
            bc.coef_truncation, bc.lambda2
        ));
    }
    report(9, pass, detail.trim());
}

#[test]
fn criterion_10_full_period_parseval() {
    let mut pass = true;
    let mut worst = 0.0f64;
    for &(m, b) in &[(16usize, 2.0), (40, 4.0), (25, 1.5)] {
        let n = 2 * m;
        let points: Vec<f64> = (0..n).map(|j| -0.5 + j as f64 / (n - 1) as f64).collect();
        let a = design_matrix(&points, m, b, Formulation::RealSystem);
        let fac = svd(&a).unwrap();
        let norms = v_function_norms(&fac.v, m, b, &[(-b / 2.0, b / 2.0)]);
        for nj in norms {
            let dev = (nj - b.sqrt()).abs();
            worst = worst.max(dev);
            pass &= dev <= 1e-10;
        }
    }
    report(10, pass, &format!("max |norm - sqrt(b)| = {worst:.1e}"));
}

// Exercised here so the shared default path stays honest: a truncated solve
// in absolute mode with everything below the cutoff must error, not return
// garbage.
#[test]
fn truncation_rejects_rank_zero() {
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1e-20, 1e-25]));
    let fac = svd(&a).unwrap();
    assert!(solve_min_norm_mode(&fac, &[1.0, 0.0], 1e-13, XiMode::Absolute).is_err());
}
