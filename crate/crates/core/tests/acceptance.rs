//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use adiabat::dicke::{enumerate_sectors, DickeModel, FieldOperator, SpinMatrix};
use adiabat::friedrichs::{build_friedrichs, FriedrichsModel};
use adiabat::grid::{
    build_grid, e_script, sample_coupling, CouplingProfile, QuadratureRule, UvShape,
};
use adiabat::propagation::{default_s_samples, RotatedFamily};
use adiabat::resonance::{leading_imaginary_part, ResolventIntegrand, SolveMethod};
use adiabat::scaling::{
    log_spaced, optimal_epsilon, spread, sweep, timescale_probe, tradeoff_bound, DickeParams,
    FitModel, TradeoffConstants,
};
use adiabat::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

const M_DEFAULT: f64 = 1e-3;
const ALPHA_DEFAULT: f64 = 1.0 / 137.0;
const K_MIN_DEFAULT: f64 = 1e-3;

/// `K_amp` with `alpha^2 E = m / 2` for the flat d = 3 profile, from
/// `E = 4 pi K^2 (k_max - k_min)`.
fn default_k_amp(m: f64, alpha: f64, k_min: f64) -> f64 {
    (m / (2.0 * alpha * alpha * 4.0 * PI * (1.0 - k_min))).sqrt()
}

fn taus() -> Vec<f64> {
    log_spaced(1e2, 1e5, 12)
}

fn friedrichs(k_amp: f64, k_min: f64, modes: usize) -> Result<FriedrichsModel> {
    let grid = build_grid(3, k_min, 1.0, modes, QuadratureRule::Midpoint)?;
    let f = sample_coupling(&CouplingProfile::new(k_amp, UvShape::Flat, 3), &grid)?;
    build_friedrichs(&f)
}

fn default_dicke(modes: usize, n_max: usize) -> DickeParams {
    DickeParams {
        d: 3,
        m: M_DEFAULT,
        k_amp: default_k_amp(M_DEFAULT, ALPHA_DEFAULT, K_MIN_DEFAULT),
        uv: UvShape::Flat,
        k_min: K_MIN_DEFAULT,
        k_max: 1.0,
        modes,
        rule: QuadratureRule::Midpoint,
        n_max,
    }
}

/// Rescales `K_amp` so that `alpha^2 E_disc = ratio * m` on the grid of `p`.
fn with_ratio(mut p: DickeParams, alpha: f64, ratio: f64) -> Result<DickeParams> {
    p.k_amp = 1.0;
    let grid = build_grid(p.d, p.k_min, p.k_max, p.modes, p.rule)?;
    let e1 = e_script(&sample_coupling(&CouplingProfile::new(1.0, p.uv, p.d), &grid)?)?;
    p.k_amp = (ratio * p.m / (alpha * alpha * e1)).sqrt();
    Ok(p)
}

/// Least-squares slope of `log y` against `log x`.
fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn power_exponent(fam: &RotatedFamily) -> Result<f64> {
    let s = sweep(fam, &taus(), &default_s_samples())?;
    Ok(s.fit(FitModel::Power).expect("fitted").params[1])
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let fr = friedrichs(default_k_amp(M_DEFAULT, ALPHA_DEFAULT, 1e-4), 1e-4, 256)?;
    let a = fr.commutator_solution()?.residual;

    let dicke = default_dicke(64, 2).build(ALPHA_DEFAULT)?;
    let b = dicke.commutator_solution(None)?.residual;
    let closure2 = default_dicke(12, 2).build(ALPHA_DEFAULT)?.commutator_solution(None)?.residual;
    let closure3 = default_dicke(12, 3).build(ALPHA_DEFAULT)?.commutator_solution(None)?.residual;

    let g = dicke.g()?;
    let c = dicke.useful_formula_check(&g)? / g.times_k().norm();

    let d_fr = fr.kato_k()?.max_abs_diff(fr.sigma())?;
    let sigma_vac = dicke
        .basis()
        .tensor(&SpinMatrix::sigma_x(), &FieldOperator::VacuumProjector)?;
    let d_di = dicke.kato_k_from_projector()?.max_abs_diff(&sigma_vac)?;

    let elapsed = start.elapsed();
    let pass = a <= 1e-12
        && b <= 1e-10
        && closure2 <= 1e-10
        && closure3 <= 1e-10
        && c <= 1e-12
        && d_fr <= 1e-14
        && d_di <= 1e-14
        && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "(a) friedrichs {a:.2e} <= 1e-12; (b) dicke M=64 N<=2 {b:.2e} <= 1e-10, \
             M=12 N<=2 {closure2:.2e} / N<=3 {closure3:.2e}; (c) {c:.2e} <= 1e-12; \
             (d) K entrywise {d_fr:.1e} / {d_di:.1e}; {:.1}s < 10s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Result<Outcome> {
    let families = [
        RotatedFamily::two_level(1.0)?,
        friedrichs(default_k_amp(M_DEFAULT, ALPHA_DEFAULT, K_MIN_DEFAULT), K_MIN_DEFAULT, 64)?
            .rotated_family()?,
        default_dicke(8, 2).build(ALPHA_DEFAULT)?.rotated_family()?,
    ];
    let mut worst = [0.0f64; 3];
    for (w, fam) in worst.iter_mut().zip(&families) {
        for s in default_s_samples() {
            *w = w.max(fam.intertwining_defect(s)?);
        }
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-10),
        format!(
            "max ||U_A P(0) - P(s) U_A|| over 17 s: two-level {:.1e}, friedrichs {:.1e}, dicke {:.1e} (<= 1e-10)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn criterion_3() -> Result<Outcome> {
    let start = Instant::now();
    let tau = 1e3;
    let dicke_params = with_ratio(
        DickeParams {
            d: 3,
            m: 1.0,
            k_amp: 1.0,
            uv: UvShape::Flat,
            k_min: 1e-3,
            k_max: 1.0,
            modes: 4,
            rule: QuadratureRule::Midpoint,
            n_max: 2,
        },
        1.0,
        0.5,
    )?;
    let families = [
        RotatedFamily::two_level(1.0)?,
        friedrichs(default_k_amp(M_DEFAULT, ALPHA_DEFAULT, K_MIN_DEFAULT), K_MIN_DEFAULT, 16)?
            .rotated_family()?,
        dicke_params.build(1.0)?.rotated_family()?,
    ];
    let s = default_s_samples();
    let mut worst = [0.0f64; 3];
    for (w, fam) in worst.iter_mut().zip(&families) {
        // theta = rate * ds = 0.01, well inside the 0.1 bound
        let rate = (tau * fam.h0_norm()).max(fam.k_op().op_norm());
        let steps = (rate / 0.01).ceil() as usize;
        let exact = fam.adiabatic_error(tau, &s)?;
        let rk4 = fam.adiabatic_error_rk4(tau, &s, steps)?;
        *w = exact
            .err
            .iter()
            .zip(&rk4.err)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    }
    let elapsed = start.elapsed();
    outcome(
        worst.iter().all(|&w| w <= 1e-6) && elapsed < Duration::from_secs(120),
        format!(
            "tau = 1e3, |err_exact - err_rk4|: two-level {:.1e}, friedrichs {:.1e}, dicke {:.1e} (<= 1e-6); {:.1}s < 120s",
            worst[0],
            worst[1],
            worst[2],
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Result<Outcome> {
    let start = Instant::now();
    let p = power_exponent(&RotatedFamily::two_level(1.0)?)?;
    let mut scaled = Vec::new();
    for m in [0.5, 1.0, 2.0] {
        let s = sweep(&RotatedFamily::two_level(m)?, &taus(), &default_s_samples())?;
        scaled.push(s.fit(FitModel::PureInverse).expect("fitted").params[0] * m);
    }
    let sp = spread(&scaled);
    let elapsed = start.elapsed();
    outcome(
        (-1.1..=-0.9).contains(&p) && sp <= 0.1 && elapsed < Duration::from_secs(60),
        format!(
            "exponent {p:.4} in [-1.1, -0.9]; a(m) m = {:.4} / {:.4} / {:.4}, spread {sp:.3} <= 0.1; {:.1}s < 60s",
            scaled[0],
            scaled[1],
            scaled[2],
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for k_min in [1e-3, 1e-4] {
        let fr = friedrichs(default_k_amp(M_DEFAULT, ALPHA_DEFAULT, k_min), k_min, 256)?;
        let p = power_exponent(&fr.rotated_family()?)?;
        pass &= (-1.1..=-0.9).contains(&p);
        parts.push(format!("k_min = {k_min:.0e}: {p:.4}"));
    }
    outcome(
        pass,
        format!("friedrichs d = 3, M = 256, exponents {} in [-1.1, -0.9]", parts.join(", ")),
    )
}

fn criterion_6() -> Result<Outcome> {
    let base = DickeParams {
        d: 3,
        m: 2.0,
        k_amp: 1.0,
        uv: UvShape::Flat,
        k_min: 1e-8,
        k_max: 1.0,
        modes: 24,
        rule: QuadratureRule::LogMidpoint,
        n_max: 2,
    };
    let alpha = 1.0;
    let d3 = with_ratio(base, alpha, 0.5)?.build(alpha)?;
    let s3 = sweep(&d3.rotated_family()?, &taus(), &default_s_samples())?;
    let bounded: Vec<f64> = s3
        .taus
        .iter()
        .zip(&s3.errs)
        .map(|(t, e)| e * t / t.ln().sqrt())
        .collect();
    let sp = spread(&bounded);

    let d4 = with_ratio(DickeParams { d: 4, ..base }, alpha, 0.5)?.build(alpha)?;
    let p4 = power_exponent(&d4.rotated_family()?)?;
    outcome(
        sp <= 0.25 && (-1.1..=-0.9).contains(&p4),
        format!(
            "d = 3: err tau / sqrt(log tau) in [{:.4}, {:.4}], spread {sp:.3} <= 0.25; d = 4 exponent {p4:.4} in [-1.1, -0.9]",
            bounded.iter().cloned().fold(f64::INFINITY, f64::min),
            bounded.iter().cloned().fold(0.0, f64::max),
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let base = with_ratio(
        DickeParams {
            d: 3,
            m: 1.0,
            k_amp: 1.0,
            uv: UvShape::Flat,
            k_min: 1e-6,
            k_max: 1.0,
            modes: 20,
            rule: QuadratureRule::LogMidpoint,
            n_max: 2,
        },
        0.05,
        0.5,
    )?;
    // alpha^2 E / m = 0.5 (alpha / 0.05)^2
    let alphas: Vec<f64> = [0.1, 0.5, 0.9].iter().map(|r: &f64| 0.05 * (r / 0.5).sqrt()).collect();
    let rows = timescale_probe(&base, &alphas, &taus(), &default_s_samples())?;
    let renorm: Vec<f64> = rows.iter().map(|r| r.amplitude_times_gap).collect();
    let bare: Vec<f64> = rows.iter().map(|r| r.amplitude_times_m).collect();
    let (sr, sb) = (spread(&renorm), spread(&bare));
    outcome(
        sr <= 0.5 * sb,
        format!(
            "alpha^2 E / m = {}: spread a (m - alpha^2 E) = {sr:.3} <= 0.5 x spread a m = {:.3}",
            rows.iter()
                .map(|r| format!("{:.2}", r.alpha * r.alpha * r.e_script / base.m))
                .collect::<Vec<_>>()
                .join("/"),
            0.5 * sb
        ),
    )
}

fn criterion_8() -> Result<Outcome> {
    let m = 1.0;
    let profile = CouplingProfile::new(1.0, UvShape::Flat, 3);
    let it = ResolventIntegrand::new(profile, 1.0)?;
    let e = it.e_script();
    let alphas = [0.02, 0.01, 0.005];
    let mut shift_dev = Vec::new();
    let mut hierarchy = Vec::new();
    let mut im_ratio = 0.0;
    for &alpha in &alphas {
        let r = it.solve_resonance(m, alpha, SolveMethod::Newton)?;
        shift_dev.push((r.e_r.re - (m - alpha * alpha * e)).abs());
        hierarchy.push(r.e_r.im.abs() / (m - r.e_r.re));
        if alpha == 0.005 {
            im_ratio = r.e_r.im / leading_imaginary_part(&profile, m, alpha);
        }
    }
    let p = log_slope(&alphas, &shift_dev);
    let q = log_slope(&alphas, &hierarchy);
    // closed form for the flat d = 3 profile with K_amp = 1 and cutoff 1:
    // Re G(e) - G(0) = -4 pi e ln((1 - e) / e), i.e. alpha^3 ln(1 / alpha)
    let closed: Vec<f64> = alphas
        .iter()
        .map(|&a| a * a * 4.0 * PI * a * m * ((1.0 - a * m) / (a * m)).ln())
        .collect();
    let p_closed = log_slope(&alphas, &closed);
    outcome(
        p >= 2.8 && (im_ratio - 1.0).abs() <= 0.1 && (q - 1.0).abs() <= 0.3,
        format!(
            "|Re E_r - (m - alpha^2 E)| ~ alpha^{p:.3} (>= 2.8; closed-form alpha^3 ln(1/alpha) term gives {p_closed:.3}); Im E_r / leading = {im_ratio:.4} at alpha = 0.005 (within 10%); \
             |Im E_r| / (m - Re E_r) ~ alpha^{q:.3} (d - 2 = 1 +- 0.3)"
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let below = with_ratio(
        DickeParams {
            d: 3,
            m: 1.0,
            k_amp: 1.0,
            uv: UvShape::Flat,
            k_min: 1e-3,
            k_max: 1.0,
            modes: 16,
            rule: QuadratureRule::Midpoint,
            n_max: 2,
        },
        1.0,
        0.5,
    )?
    .build(1.0)?;
    let e_below = below.min_eigenvalue()?;

    // d = 2 coupling: E grows like ln(1 / k_min)
    let grid = build_grid(2, 1e-6, 1.0, 16, QuadratureRule::LogMidpoint)?;
    let f1 = sample_coupling(&CouplingProfile::new(1.0, UvShape::Flat, 2), &grid)?;
    let alpha = 1.0;
    let m = 1.0;
    let k_amp = (2.0 * m / (alpha * alpha * e_script(&f1)?)).sqrt();
    let f = sample_coupling(&CouplingProfile::new(k_amp, UvShape::Flat, 2), &grid)?;
    let above = DickeModel::build(Arc::new(enumerate_sectors(&grid, 2)?), m, alpha, &f)?;
    let e_above = above.min_eigenvalue()?;
    outcome(
        e_below.abs() <= 1e-10 && below.ground_state_flag() && e_above < -1e-8 && !above.ground_state_flag(),
        format!(
            "alpha^2 E / m = 0.5: min eig {e_below:.2e} (|.| <= 1e-10); d = 2 coupling, alpha^2 E / m = {:.2}: min eig {e_above:.4e} (< -1e-8)",
            alpha * alpha * above.e_script() / m
        ),
    )
}

fn criterion_10() -> Result<Outcome> {
    let d = RotatedFamily::two_level(1.0)?.p_dot_norm()?;
    let fr = friedrichs(default_k_amp(M_DEFAULT, ALPHA_DEFAULT, K_MIN_DEFAULT), K_MIN_DEFAULT, 64)?;
    let unit = TradeoffConstants { c_hat: 1.0, c: 1.0, d };
    let measured = TradeoffConstants {
        c_hat: 1.0,
        c: fr.commutator_solution()?.x.op_norm(),
        d,
    };
    // brute force over 1e-12 .. 1e2
    let eps_grid = log_spaced(1e-12, 1e2, 20_001);
    let worst_ratio = |k: &TradeoffConstants| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (mu, nu) in [(1.0, 0.0), (1.0, 1.0), (2.0, 1.0)] {
            for tau in [1e2, 1e3, 1e4, 1e5] {
                let eps = optimal_epsilon(tau, mu, nu)?;
                let achieved = tradeoff_bound(k, eps, tau, mu, nu);
                let best = eps_grid
                    .iter()
                    .map(|&e| tradeoff_bound(k, e, tau, mu, nu))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(achieved / best);
            }
        }
        Ok(worst)
    };
    let w_unit = worst_ratio(&unit)?;
    let w_measured = worst_ratio(&measured)?;
    outcome(
        w_unit <= 2.0,
        format!(
            "C_hat = C = 1, D = {d:.3}: bound(eps = tau^(-1/(mu+nu))) / brute-force min <= {w_unit:.3} (<= 2) \
             for (mu, nu) in (1,0), (1,1), (2,1); with C = ||X_friedrichs|| = {:.3} the ratio is {w_measured:.3} (not gated)",
            measured.c
        ),
    )
}

fn main() {
    let criteria: [fn() -> Result<Outcome>; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut failures = 0;
    for (n, run) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        if !out.pass {
            failures += 1;
        }
        println!(
            "criterion {}: {} {} [{:.1}s]",
            n + 1,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
