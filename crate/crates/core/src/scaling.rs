//! Sweeps of the adiabatic error over `tau` and decay-law regression.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::{enumerate_sectors, DickeModel};
use crate::error::{Error, Result};
use crate::grid::{build_grid, sample_coupling, CouplingProfile, QuadratureRule, UvShape};
use crate::propagation::RotatedFamily;

/// Fewest samples a sweep or fit accepts.
pub const MIN_SAMPLES: usize = 8;

/// `n` points from `lo` to `hi`, equally spaced in `log`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `(max - min) / mean`.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `a tau^p`, params `[a, p]`.
    Power,
    /// `a sqrt(log tau) / tau`, params `[a]`.
    PowerLog,
    /// `a / tau`, params `[a]`.
    PureInverse,
}

impl FitModel {
    pub fn name(&self) -> &'static str {
        match self {
            FitModel::Power => "power",
            FitModel::PowerLog => "power_log",
            FitModel::PureInverse => "pure_inverse",
        }
    }

    pub fn predict(&self, params: &[f64], tau: f64) -> f64 {
        match self {
            FitModel::Power => params[0] * tau.powf(params[1]),
            FitModel::PowerLog => params[0] * tau.ln().sqrt() / tau,
            FitModel::PureInverse => params[0] / tau,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<f64>,
    pub rms_log_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSeries {
    pub family_id: String,
    pub taus: Vec<f64>,
    /// Maximum of the error over the `s` samples.
    pub errs: Vec<f64>,
    /// Error at `s = 1` (last sample).
    pub errs_at_end: Vec<f64>,
    /// `errs` strictly decreasing in `tau`.
    pub monotone: bool,
    pub fits: Vec<FitResult>,
}

impl ScalingSeries {
    pub fn fit(&self, model: FitModel) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.model == model)
    }
}

/// Adiabatic error of `fam` at every `tau`, fitted with all three decay laws.
///
/// Each `tau` is an independent job on the current rayon pool; results are
/// collected in input order.
pub fn sweep(fam: &RotatedFamily, taus: &[f64], s_samples: &[f64]) -> Result<ScalingSeries> {
    check_taus(taus)?;
    let rows: Vec<(f64, f64)> = taus
        .par_iter()
        .map(|&tau| {
            let r = fam.adiabatic_error(tau, s_samples)?;
            Ok((r.max_err(), r.err_at_end()))
        })
        .collect::<Result<_>>()?;
    let (errs, errs_at_end): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let fits = fit_decay(taus, &errs)?;
    Ok(ScalingSeries {
        family_id: fam.label().to_string(),
        taus: taus.to_vec(),
        monotone: is_decreasing(&errs),
        errs,
        errs_at_end,
        fits,
    })
}

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.len() < MIN_SAMPLES {
        return Err(Error::BadFitInput(format!(
            "need at least {MIN_SAMPLES} tau values, got {}",
            taus.len()
        )));
    }
    if taus.iter().any(|&t| !(t > 0.0) || !t.is_finite()) || taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadFitInput("tau values must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn is_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares fits of `log err` against the three decay laws.
pub fn fit_decay(taus: &[f64], errs: &[f64]) -> Result<Vec<FitResult>> {
    check_taus(taus)?;
    if errs.len() != taus.len() {
        return Err(Error::BadFitInput(format!(
            "{} errors for {} tau values",
            errs.len(),
            taus.len()
        )));
    }
    if errs.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::BadFitInput("errors must be positive and finite".into()));
    }
    if taus.iter().any(|&t| t <= 1.0) {
        return Err(Error::BadFitInput("the sqrt(log tau) law needs tau > 1".into()));
    }
    let x: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;

    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let p = sxy / sxx;
    let power = vec![(my - p * mx).exp(), p];

    // one-parameter laws: log a is the mean offset from the shape
    let offset = |shape: &dyn Fn(f64) -> f64| -> f64 {
        (taus.iter().zip(&y).map(|(&t, &ly)| ly - shape(t).ln()).sum::<f64>() / n).exp()
    };
    let power_log = vec![offset(&|t: f64| t.ln().sqrt() / t)];
    let pure_inverse = vec![offset(&|t: f64| 1.0 / t)];

    Ok([
        (FitModel::Power, power),
        (FitModel::PowerLog, power_log),
        (FitModel::PureInverse, pure_inverse),
    ]
    .into_iter()
    .map(|(model, params)| {
        let ss: f64 = taus
            .iter()
            .zip(&y)
            .map(|(&t, &ly)| (ly - model.predict(&params, t).ln()).powi(2))
            .sum();
        FitResult {
            model,
            params,
            rms_log_residual: (ss / n).sqrt(),
        }
    })
    .collect())
}

/// `eps = tau^(-1 / (mu + nu))`.
pub fn optimal_epsilon(tau: f64, mu: f64, nu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter {
            name: "mu",
            reason: format!("mu must be > 0 for the bound to decay, got {mu}"),
        });
    }
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "nu",
            reason: format!("nu must be >= 0, got {nu}"),
        });
    }
    if !(tau > 1.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("tau must be > 1, got {tau}"),
        });
    }
    Ok(tau.powf(-1.0 / (mu + nu)))
}

/// Constants of the bound `C_hat eps^mu + (2 + D) C eps^(-nu) / tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffConstants {
    pub c_hat: f64,
    pub c: f64,
    pub d: f64,
}

pub fn tradeoff_bound(k: &TradeoffConstants, eps: f64, tau: f64, mu: f64, nu: f64) -> f64 {
    k.c_hat * eps.powf(mu) + (2.0 + k.d) * k.c * eps.powf(-nu) / tau
}

/// `tau^(-mu / (mu + nu))`, the decay rate the tradeoff predicts.
pub fn predicted_exponent(mu: f64, nu: f64) -> f64 {
    -mu / (mu + nu)
}

/// Model and grid parameters of a Dicke family, everything except `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    pub d: u32,
    pub m: f64,
    pub k_amp: f64,
    pub uv: UvShape,
    pub k_min: f64,
    pub k_max: f64,
    pub modes: usize,
    pub rule: QuadratureRule,
    pub n_max: usize,
}

impl DickeParams {
    pub fn build(&self, alpha: f64) -> Result<DickeModel> {
        let grid = build_grid(self.d, self.k_min, self.k_max, self.modes, self.rule)?;
        let f = sample_coupling(&CouplingProfile::new(self.k_amp, self.uv, self.d), &grid)?;
        let basis = Arc::new(enumerate_sectors(&grid, self.n_max)?);
        DickeModel::build(basis, self.m, alpha, &f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimescaleRow {
    pub alpha: f64,
    pub e_script: f64,
    /// `m - alpha^2 E`.
    pub gap: f64,
    /// Fitted `a` of `err = a / tau`.
    pub amplitude: f64,
    pub amplitude_times_gap: f64,
    pub amplitude_times_m: f64,
}

/// Fits `err ~ a(alpha) / tau` for each `alpha` and compares the
/// normalizations `a (m - alpha^2 E)` and `a m`.
pub fn timescale_probe(
    base: &DickeParams,
    alphas: &[f64],
    taus: &[f64],
    s_samples: &[f64],
) -> Result<Vec<TimescaleRow>> {
    alphas
        .iter()
        .map(|&alpha| {
            let model = base.build(alpha)?;
            if !model.ground_state_flag() {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    reason: format!(
                        "alpha = {alpha} violates alpha^2 E < m (alpha^2 E = {:.6e}, m = {})",
                        alpha * alpha * model.e_script(),
                        base.m
                    ),
                });
            }
            let series = sweep(&model.rotated_family()?, taus, s_samples)?;
            let amplitude = series.fit(FitModel::PureInverse).expect("always fitted").params[0];
            let gap = model.renormalized_gap();
            Ok(TimescaleRow {
                alpha,
                e_script: model.e_script(),
                gap,
                amplitude,
                amplitude_times_gap: amplitude * gap,
                amplitude_times_m: amplitude * base.m,
            })
        })
        .collect()
}
