//! Subcommand bodies. Each returns the files it wrote.

use std::path::{Path, PathBuf};

use adiabat::dicke::{DickeModel, FieldOperator, SpinMatrix};
use adiabat::friedrichs::{build_friedrichs, FriedrichsModel};
use adiabat::grid::{build_grid, sample_coupling, CouplingProfile};
use adiabat::linalg::{c64, BasisTag, OperatorMatrix, StateVector};
use adiabat::propagation::RotatedFamily;
use adiabat::resonance::ResolventIntegrand;
use adiabat::scaling::{sweep, timescale_probe, DickeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Family, RunConfig, Subcommand};
use crate::error::{CliError, Context};
use crate::output::{write_csv, write_json};
use crate::records::{
    scaling_rows, Check, ConfigEcho, EpsRow, FamilyReport, ResonanceRecord, ResonanceScan,
    ResonanceScanRow, RunRecord, VerifyReport,
};

/// Modes of the small grid on which `N_max = 3` closure is checked.
const CLOSURE_MODES: usize = 12;

pub fn run(subcommand: Subcommand, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out)?;
    let echo = ConfigEcho {
        subcommand,
        version: crate::records::version_string(),
        config: cfg.clone(),
    };
    match subcommand {
        Subcommand::TwoLevel => family_files(&echo, Family::TwoLevel, out, subcommand.name()),
        Subcommand::Friedrichs => family_files(&echo, Family::Friedrichs, out, subcommand.name()),
        Subcommand::Dicke => family_files(&echo, Family::Dicke, out, subcommand.name()),
        Subcommand::Scaling => {
            let stem = format!("scaling-{}", cfg.family.name());
            family_files(&echo, cfg.family, out, &stem)
        }
        Subcommand::Resonance => resonance(&echo, out),
        Subcommand::Verify => verify(&echo, out),
    }
}

pub fn dicke_params(cfg: &RunConfig) -> DickeParams {
    DickeParams {
        d: cfg.d,
        m: cfg.m,
        k_amp: cfg.k_amp,
        uv: cfg.uv_shape,
        k_min: cfg.k_min,
        k_max: cfg.lambda,
        modes: cfg.dicke_modes,
        rule: cfg.rule,
        n_max: cfg.n_max,
    }
}

fn friedrichs_model(cfg: &RunConfig) -> Result<FriedrichsModel, CliError> {
    let grid = build_grid(cfg.d, cfg.k_min, cfg.lambda, cfg.modes, cfg.rule).context("friedrichs grid")?;
    let f = sample_coupling(&CouplingProfile::new(cfg.k_amp, cfg.uv_shape, cfg.d), &grid)
        .context("friedrichs coupling")?;
    build_friedrichs(&f).context("friedrichs model")
}

fn dicke_model(cfg: &RunConfig) -> Result<DickeModel, CliError> {
    dicke_params(cfg).build(cfg.alpha).context("dicke model")
}

fn family_report(cfg: &RunConfig, family: Family, with_timescale: bool) -> Result<FamilyReport, CliError> {
    let report = |fam: RotatedFamily| -> Result<FamilyReport, CliError> {
        Ok(FamilyReport {
            family,
            dim: fam.dim(),
            p_dot_norm: fam.p_dot_norm().context("p_dot_norm")?,
            x_norm: None,
            commutator_residual: None,
            e_script: None,
            renormalized_gap: None,
            min_eigenvalue: None,
            series: sweep(&fam, &cfg.taus, &cfg.s_samples).context("sweep")?,
            eps_table: Vec::new(),
            timescale: Vec::new(),
        })
    };
    match family {
        Family::TwoLevel => report(RotatedFamily::two_level(cfg.m).context("two-level family")?),
        Family::Friedrichs => {
            let model = friedrichs_model(cfg)?;
            let sol = model.commutator_solution().context("friedrichs commutator")?;
            let mut r = report(model.rotated_family().context("friedrichs family")?)?;
            r.x_norm = Some(sol.x.op_norm());
            r.commutator_residual = Some(sol.residual);
            Ok(r)
        }
        Family::Dicke => {
            let model = dicke_model(cfg)?;
            let mut r = report(model.rotated_family().context("dicke family")?)?;
            r.e_script = Some(model.e_script());
            r.renormalized_gap = Some(model.renormalized_gap());
            r.min_eigenvalue = Some(model.min_eigenvalue().context("dicke spectrum")?);
            // a collapsed gap has no commutator solution; the sweep still runs
            if let Ok(sol) = model.commutator_solution(None) {
                r.x_norm = Some(sol.x_norm);
                r.commutator_residual = Some(sol.residual);
            }
            for &eps in &cfg.eps_list {
                let sol = model.commutator_solution(Some(eps)).context("dicke cutoff solution")?;
                r.eps_table.push(EpsRow {
                    eps,
                    gap: sol.gap,
                    x_norm: sol.x_norm,
                    y_norm: sol.y_norm,
                    residual: sol.residual,
                });
            }
            if with_timescale && !cfg.alpha_list.is_empty() {
                r.timescale = timescale_probe(&dicke_params(cfg), &cfg.alpha_list, &cfg.taus, &cfg.s_samples)
                    .context("timescale probe")?;
            }
            Ok(r)
        }
    }
}

fn family_files(echo: &ConfigEcho, family: Family, out: &Path, stem: &str) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &echo.config;
    let report = family_report(cfg, family, echo.subcommand == Subcommand::Scaling)?;
    let mut files = vec![write_csv(&out.join(format!("{stem}.csv")), echo, &scaling_rows(&report.series))?];
    if !report.eps_table.is_empty() {
        files.push(write_csv(&out.join(format!("{stem}-eps.csv")), echo, &report.eps_table)?);
    }
    if !report.timescale.is_empty() {
        files.push(write_csv(&out.join(format!("{stem}-timescale.csv")), echo, &report.timescale)?);
    }
    files.push(write_json(
        &out.join(format!("{stem}.json")),
        &RunRecord {
            echo: echo.clone(),
            payload: report,
        },
    )?);
    Ok(files)
}

/// Least-squares slope of `log y` against `log x`, if there are two points.
fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

fn resonance(echo: &ConfigEcho, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &echo.config;
    let it = ResolventIntegrand::new(CouplingProfile::new(cfg.k_amp, cfg.uv_shape, cfg.d), cfg.lambda)
        .context("resolvent")?;
    let e = it.e_script();
    let record = |alpha: f64| -> Result<ResonanceRecord, CliError> {
        let r = it
            .solve_resonance(cfg.m, alpha, cfg.method)
            .context(&format!("resonance at alpha = {alpha}"))?;
        Ok(ResonanceRecord {
            m: cfg.m,
            alpha,
            d: cfg.d,
            e_script: e,
            re_er: r.e_r.re,
            im_er: r.e_r.im,
            lamb_shift: r.lamb_shift,
            lifetime_rate: r.lifetime_rate,
            residual: r.residual,
        })
    };
    if cfg.alpha_list.is_empty() {
        let path = write_json(
            &out.join("resonance.json"),
            &RunRecord {
                echo: echo.clone(),
                payload: record(cfg.alpha)?,
            },
        )?;
        return Ok(vec![path]);
    }
    let records = cfg.alpha_list.iter().map(|&a| record(a)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<ResonanceScanRow> = records
        .iter()
        .map(|r| ResonanceScanRow {
            alpha: r.alpha,
            e_script: r.e_script,
            re_er: r.re_er,
            im_er: r.im_er,
            lamb_shift: r.lamb_shift,
            lifetime_rate: r.lifetime_rate,
            residual: r.residual,
            lamb_correction: r.re_er - (r.m - r.alpha * r.alpha * r.e_script),
        })
        .collect();
    let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let corrections: Vec<f64> = rows.iter().map(|r| r.lamb_correction).collect();
    let hierarchy: Vec<f64> = rows.iter().map(|r| r.im_er / r.lamb_shift).collect();
    let scan = ResonanceScan {
        lamb_correction_slope: log_slope(&alphas, &corrections),
        hierarchy_slope: log_slope(&alphas, &hierarchy),
        records,
    };
    Ok(vec![
        write_csv(&out.join("resonance-scan.csv"), echo, &rows)?,
        write_json(
            &out.join("resonance.json"),
            &RunRecord {
                echo: echo.clone(),
                payload: scan,
            },
        )?,
    ])
}

fn check(checks: &mut Vec<Check>, name: &str, value: f64, tolerance: f64) {
    checks.push(Check {
        name: name.to_string(),
        value,
        tolerance,
        pass: value <= tolerance,
    });
}

fn max_intertwining(fam: &RotatedFamily, s_samples: &[f64]) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for &s in s_samples {
        worst = worst.max(fam.intertwining_defect(s).context("intertwining")?);
    }
    Ok(worst)
}

/// Hermitian `H0` with `H0 e_0 = 0` and a Hermitian `sigma`, both random.
fn random_family(seed: u64, n: usize) -> Result<RotatedFamily, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = BasisTag::new(format!("random-{n}"));
    let mut hermitian = |zero_row: bool| {
        let mut a = vec![c64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                if zero_row && (i == 0 || j == 0) {
                    continue;
                }
                let v = if i == j {
                    c64::new(rng.gen_range(0.5..2.0), 0.0)
                } else {
                    c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                };
                a[i * n + j] = v;
                a[j * n + i] = v.conj();
            }
        }
        OperatorMatrix::from_fn(n, basis.clone(), |i, j| a[i * n + j])
    };
    let h0 = hermitian(true);
    let sigma = hermitian(false);
    RotatedFamily::new("random", h0, sigma, StateVector::basis_vector(n, 0, basis.clone()))
        .context("random family")
}

fn verify(echo: &ConfigEcho, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let cfg = &echo.config;
    let mut checks = Vec::new();

    let fr = friedrichs_model(cfg)?;
    let fr_sol = fr.commutator_solution().context("friedrichs commutator")?;
    check(&mut checks, "friedrichs_commutator_residual", fr_sol.residual, 1e-12);
    let k_diff = fr.kato_k().context("friedrichs K")?.max_abs_diff(fr.sigma()).context("friedrichs K")?;
    check(&mut checks, "friedrichs_kato_k_equals_sigma", k_diff, 1e-14);

    let dicke = dicke_model(cfg)?;
    let sol = dicke.commutator_solution(None).context("dicke commutator")?;
    check(&mut checks, "dicke_commutator_residual", sol.residual, 1e-10);
    let small = DickeParams {
        modes: cfg.dicke_modes.min(CLOSURE_MODES),
        ..dicke_params(cfg)
    };
    for n_max in [2, 3] {
        let r = DickeParams { n_max, ..small }
            .build(cfg.alpha)
            .and_then(|m| m.commutator_solution(None))
            .context("sector closure")?
            .residual;
        check(&mut checks, &format!("dicke_closure_n_max_{n_max}"), r, 1e-10);
    }
    let g = dicke.g().context("g")?;
    let useful = dicke.useful_formula_check(&g).context("useful formula")? / g.times_k().norm();
    check(&mut checks, "dicke_energy_creation_formula", useful, 1e-12);
    let sigma_vac = dicke
        .basis()
        .tensor(&SpinMatrix::sigma_x(), &FieldOperator::VacuumProjector)
        .context("sigma x vacuum")?;
    let k_diff = dicke
        .kato_k_from_projector()
        .and_then(|k| k.max_abs_diff(&sigma_vac))
        .context("dicke K")?;
    check(&mut checks, "dicke_kato_k_equals_sigma_vacuum", k_diff, 1e-14);
    let zero_mode = dicke.hamiltonian().apply(&dicke.vacuum()).context("zero mode")?.norm();
    check(&mut checks, "dicke_vacuum_zero_mode", zero_mode, 0.0);
    let eps_list = if cfg.eps_list.is_empty() {
        vec![10.0 * cfg.k_min]
    } else {
        cfg.eps_list.clone()
    };
    for eps in eps_list {
        let r = dicke.commutator_solution(Some(eps)).context("dicke cutoff solution")?.residual;
        check(&mut checks, &format!("dicke_cutoff_residual_eps_{eps:e}"), r, 1e-10);
    }

    let families = [
        ("two_level", RotatedFamily::two_level(cfg.m).context("two-level family")?),
        ("friedrichs", fr.rotated_family().context("friedrichs family")?),
        ("dicke", dicke.rotated_family().context("dicke family")?),
        ("random", random_family(cfg.seed, 6)?),
    ];
    for (name, fam) in &families {
        check(
            &mut checks,
            &format!("{name}_intertwining"),
            max_intertwining(fam, &cfg.s_samples)?,
            1e-10,
        );
    }

    let pass = checks.iter().all(|c| c.pass);
    let path = write_json(
        &out.join("verify.json"),
        &RunRecord {
            echo: echo.clone(),
            payload: VerifyReport {
                checks: checks.clone(),
                pass,
            },
        },
    )?;
    if !pass {
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} = {:.3e} > {:.1e}", c.name, c.value, c.tolerance))
            .collect();
        return Err(CliError::Verification(failed.join(", ")));
    }
    Ok(vec![path])
}
