//! Result payloads and the record that wraps them on disk.

use adiabat::scaling::{ScalingSeries, TimescaleRow};
use serde::{Deserialize, Serialize};

use crate::config::{Family, RunConfig, Subcommand};

pub fn version_string() -> String {
    format!("adiabat-cli {}", env!("CARGO_PKG_VERSION"))
}

/// Everything needed to rerun: `config` is accepted as a `--config` JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub subcommand: Subcommand,
    pub version: String,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord<P> {
    #[serde(flatten)]
    pub echo: ConfigEcho,
    pub payload: P,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsRow {
    pub eps: f64,
    /// `m - alpha^2 E_eps^c`.
    pub gap: f64,
    pub x_norm: f64,
    pub y_norm: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family: Family,
    pub dim: usize,
    /// `D = ||[sigma, P0]||`.
    pub p_dot_norm: f64,
    /// `||X||` of the commutator solution.
    pub x_norm: Option<f64>,
    pub commutator_residual: Option<f64>,
    pub e_script: Option<f64>,
    pub renormalized_gap: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub series: ScalingSeries,
    pub eps_table: Vec<EpsRow>,
    pub timescale: Vec<TimescaleRow>,
}

/// One resonance, keyed as in the output contract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceRecord {
    pub m: f64,
    pub alpha: f64,
    pub d: u32,
    #[serde(rename = "E_script")]
    pub e_script: f64,
    #[serde(rename = "Re_Er")]
    pub re_er: f64,
    #[serde(rename = "Im_Er")]
    pub im_er: f64,
    pub lamb_shift: f64,
    pub lifetime_rate: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceScan {
    pub records: Vec<ResonanceRecord>,
    /// Slope of `log |Re E_r - (m - alpha^2 E)|` against `log alpha`.
    pub lamb_correction_slope: Option<f64>,
    /// Slope of `log (|Im E_r| / lamb_shift)` against `log alpha`.
    pub hierarchy_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceScanRow {
    pub alpha: f64,
    #[serde(rename = "E_script")]
    pub e_script: f64,
    #[serde(rename = "Re_Er")]
    pub re_er: f64,
    #[serde(rename = "Im_Er")]
    pub im_er: f64,
    pub lamb_shift: f64,
    pub lifetime_rate: f64,
    pub residual: f64,
    /// `Re E_r - (m - alpha^2 E)`.
    pub lamb_correction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// One line of a scaling CSV: a `tau` sample paired with one fitted law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub tau: f64,
    pub err_max_s: f64,
    pub err_at_s1: f64,
    pub fit_model: String,
    pub fit_param_0: f64,
    pub fit_param_1: Option<f64>,
    pub rms_log_residual: f64,
}

pub fn scaling_rows(series: &ScalingSeries) -> Vec<ScalingRow> {
    let mut rows = Vec::with_capacity(series.taus.len() * series.fits.len());
    for fit in &series.fits {
        for ((&tau, &err), &end) in series.taus.iter().zip(&series.errs).zip(&series.errs_at_end) {
            rows.push(ScalingRow {
                tau,
                err_max_s: err,
                err_at_s1: end,
                fit_model: fit.model.name().to_string(),
                fit_param_0: fit.params[0],
                fit_param_1: fit.params.get(1).copied(),
                rms_log_residual: fit.rms_log_residual,
            });
        }
    }
    rows
}
