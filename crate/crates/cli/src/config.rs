//! Run configuration: TOML or JSON file, command-line overrides, defaults.

use std::fmt;
use std::path::Path;

use adiabat::grid::{build_grid, e_script, omega, sample_coupling, CouplingProfile, QuadratureRule, UvShape};
use adiabat::propagation::default_s_samples;
use adiabat::quadrature::integrate_adaptive;
use adiabat::resonance::{ResolventIntegrand, SolveMethod};
use adiabat::scaling::{log_spaced, MIN_SAMPLES};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

pub const DEFAULT_D: u32 = 3;
pub const DEFAULT_M: f64 = 1e-3;
pub const DEFAULT_ALPHA: f64 = 1.0 / 137.0;
pub const DEFAULT_K_MIN: f64 = 1e-3;
pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_MODES: usize = 256;
pub const DEFAULT_DICKE_MODES: usize = 24;
pub const DEFAULT_N_MAX: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    TwoLevel,
    Friedrichs,
    Dicke,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::TwoLevel => "two-level",
            Family::Friedrichs => "friedrichs",
            Family::Dicke => "dicke",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    TwoLevel,
    Friedrichs,
    Dicke,
    Resonance,
    Scaling,
    Verify,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::TwoLevel => "two-level",
            Subcommand::Friedrichs => "friedrichs",
            Subcommand::Dicke => "dicke",
            Subcommand::Resonance => "resonance",
            Subcommand::Scaling => "scaling",
            Subcommand::Verify => "verify",
        }
    }
}

/// Every key a config file may set. Absent keys take defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub d: Option<u32>,
    pub m: Option<f64>,
    pub alpha: Option<f64>,
    pub k_amp: Option<f64>,
    pub uv_shape: Option<UvShape>,
    pub k_min: Option<f64>,
    pub lambda: Option<f64>,
    pub modes: Option<usize>,
    pub dicke_modes: Option<usize>,
    pub n_max: Option<usize>,
    pub rule: Option<QuadratureRule>,
    pub taus: Option<Vec<f64>>,
    pub s_samples: Option<Vec<f64>>,
    pub eps_list: Option<Vec<f64>>,
    pub alpha_list: Option<Vec<f64>>,
    pub family: Option<Family>,
    pub method: Option<SolveMethod>,
    pub seed: Option<u64>,
}

/// Resolved configuration. Serializes to a document `FileConfig` accepts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub d: u32,
    pub m: f64,
    pub alpha: f64,
    pub k_amp: f64,
    pub uv_shape: UvShape,
    pub k_min: f64,
    pub lambda: f64,
    /// Modes of the Friedrichs grid.
    pub modes: usize,
    /// Modes of the Dicke grid.
    pub dicke_modes: usize,
    pub n_max: usize,
    pub rule: QuadratureRule,
    pub taus: Vec<f64>,
    pub s_samples: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub family: Family,
    pub method: SolveMethod,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Reads a TOML file, or JSON when the extension is `.json`.
pub fn read_config_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, path.extension().is_some_and(|x| x == "json"))
}

pub fn parse_config_str(text: &str, json: bool) -> Result<FileConfig, ConfigError> {
    if json {
        serde_json::from_str(text).map_err(|e| ConfigError::new("config", e.to_string()))
    } else {
        toml::from_str(text).map_err(|e: toml::de::Error| {
            let key = e
                .span()
                .and_then(|s| key_at(text, s.start))
                .unwrap_or_else(|| "config".into());
            ConfigError::new(key, e.message().to_string())
        })
    }
}

/// Name of the `key = value` line that contains byte `offset`.
fn key_at(text: &str, offset: usize) -> Option<String> {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let key = line.split('=').next()?.trim();
    (!key.is_empty() && line.contains('=')).then(|| key.to_string())
}

/// Command-line values that replace file values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub d: Option<u32>,
    pub m: Option<f64>,
    pub alpha: Option<f64>,
    pub k_amp: Option<f64>,
    pub k_min: Option<f64>,
    pub lambda: Option<f64>,
    pub modes: Option<usize>,
    pub dicke_modes: Option<usize>,
    pub n_max: Option<usize>,
    pub rule: Option<QuadratureRule>,
    pub taus: Option<Vec<f64>>,
    pub eps_list: Option<Vec<f64>>,
    pub alpha_list: Option<Vec<f64>>,
    pub family: Option<Family>,
    pub method: Option<SolveMethod>,
    pub seed: Option<u64>,
}

impl Overrides {
    fn apply(self, mut f: FileConfig) -> FileConfig {
        macro_rules! take {
            ($($k:ident),*) => { $( if self.$k.is_some() { f.$k = self.$k; } )* };
        }
        take!(d, m, alpha, k_amp, k_min, lambda, modes, dicke_modes, n_max, rule, taus, eps_list, alpha_list, family, method, seed);
        f
    }
}

/// `E = int |f|^2 / k` over `[k_min, lambda]` for `K_amp = 1`.
pub fn unit_e_script(d: u32, uv: UvShape, k_min: f64, lambda: f64) -> f64 {
    match uv {
        UvShape::Flat if d == 2 => omega(2) * (lambda / k_min).ln(),
        UvShape::Flat => {
            let p = d as i32 - 2;
            omega(d) * (lambda.powi(p) - k_min.powi(p)) / p as f64
        }
        UvShape::Gaussian { .. } => {
            let profile = CouplingProfile::new(1.0, uv, d);
            integrate_adaptive(
                |k| adiabat::linalg::c64::new(profile.radial_density(k) / k, 0.0),
                k_min,
                lambda,
                1e-14,
                1e-12,
            )
            .re
        }
    }
}

/// `K_amp` with `alpha^2 E = m / 2`.
pub fn default_k_amp(d: u32, uv: UvShape, k_min: f64, lambda: f64, m: f64, alpha: f64) -> f64 {
    (m / (2.0 * alpha * alpha * unit_e_script(d, uv, k_min, lambda))).sqrt()
}

/// Fills defaults and checks every constraint.
pub fn resolve(
    file: FileConfig,
    overrides: Overrides,
    subcommand: Subcommand,
    allow_critical: bool,
) -> Result<RunConfig, ConfigError> {
    let f = overrides.apply(file);
    let d = f.d.unwrap_or(DEFAULT_D);
    let m = f.m.unwrap_or(DEFAULT_M);
    let alpha = f.alpha.unwrap_or(DEFAULT_ALPHA);
    let uv_shape = f.uv_shape.unwrap_or(UvShape::Flat);
    let k_min = f.k_min.unwrap_or(DEFAULT_K_MIN);
    let lambda = f.lambda.unwrap_or(DEFAULT_LAMBDA);

    if d < 2 {
        return Err(ConfigError::new("d", format!("dimension must satisfy d >= 2, got {d}")));
    }
    positive("m", m)?;
    positive("alpha", alpha)?;
    positive("k_min", k_min)?;
    positive("lambda", lambda)?;
    if lambda <= k_min {
        return Err(ConfigError::new(
            "lambda",
            format!("ultraviolet cutoff must satisfy lambda > k_min, got {lambda} <= {k_min}"),
        ));
    }
    if let UvShape::Gaussian { width } = uv_shape {
        positive("uv_shape.width", width)?;
    }
    let k_amp = match f.k_amp {
        Some(k) => {
            positive("k_amp", k)?;
            k
        }
        None => default_k_amp(d, uv_shape, k_min, lambda, m, alpha),
    };

    let cfg = RunConfig {
        d,
        m,
        alpha,
        k_amp,
        uv_shape,
        k_min,
        lambda,
        modes: f.modes.unwrap_or(DEFAULT_MODES),
        dicke_modes: f.dicke_modes.unwrap_or(DEFAULT_DICKE_MODES),
        n_max: f.n_max.unwrap_or(DEFAULT_N_MAX),
        rule: f.rule.unwrap_or(QuadratureRule::Midpoint),
        taus: f.taus.unwrap_or_else(|| log_spaced(1e2, 1e5, 12)),
        s_samples: f.s_samples.unwrap_or_else(default_s_samples),
        eps_list: f.eps_list.unwrap_or_default(),
        alpha_list: f.alpha_list.unwrap_or_default(),
        family: f.family.unwrap_or(Family::Dicke),
        method: f.method.unwrap_or(SolveMethod::Newton),
        seed: f.seed.unwrap_or(0),
    };

    if cfg.modes < 2 {
        return Err(ConfigError::new("modes", format!("need modes >= 2, got {}", cfg.modes)));
    }
    if cfg.dicke_modes < 2 {
        return Err(ConfigError::new(
            "dicke_modes",
            format!("need dicke_modes >= 2, got {}", cfg.dicke_modes),
        ));
    }
    if !(1..=3).contains(&cfg.n_max) {
        return Err(ConfigError::new("n_max", format!("need 1 <= n_max <= 3, got {}", cfg.n_max)));
    }
    if cfg.taus.len() < MIN_SAMPLES {
        return Err(ConfigError::new(
            "taus",
            format!("need at least {MIN_SAMPLES} values, got {}", cfg.taus.len()),
        ));
    }
    if cfg.taus.iter().any(|&t| !(t > 1.0) || !t.is_finite()) || cfg.taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new("taus", "values must satisfy 1 < tau_1 < tau_2 < ..."));
    }
    if cfg.s_samples.is_empty()
        || cfg.s_samples.iter().any(|s| !(0.0..=1.0).contains(s))
        || cfg.s_samples.windows(2).any(|w| w[1] < w[0])
    {
        return Err(ConfigError::new(
            "s_samples",
            "need a nonempty nondecreasing list inside [0, 1]",
        ));
    }
    for &e in &cfg.eps_list {
        positive("eps_list", e)?;
    }
    for &a in &cfg.alpha_list {
        positive("alpha_list", a)?;
    }

    if !allow_critical {
        check_ground_state(&cfg, subcommand)?;
    }
    Ok(cfg)
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must satisfy 0 < {key} < inf, got {v}")))
    }
}

/// Discrete `E` on the Dicke grid.
pub fn dicke_e_script(cfg: &RunConfig) -> Result<f64, ConfigError> {
    let grid = build_grid(cfg.d, cfg.k_min, cfg.lambda, cfg.dicke_modes, cfg.rule)
        .map_err(|e| ConfigError::new("dicke_modes", e.to_string()))?;
    let f = sample_coupling(&CouplingProfile::new(cfg.k_amp, cfg.uv_shape, cfg.d), &grid)
        .map_err(|e| ConfigError::new("k_amp", e.to_string()))?;
    e_script(&f).map_err(|e| ConfigError::new("k_amp", e.to_string()))
}

/// Rejects `alpha^2 E >= m` where the subcommand builds a Dicke model or
/// solves for the resonance.
fn check_ground_state(cfg: &RunConfig, subcommand: Subcommand) -> Result<(), ConfigError> {
    let uses_dicke = matches!(subcommand, Subcommand::Dicke | Subcommand::Verify)
        || (subcommand == Subcommand::Scaling && cfg.family == Family::Dicke);
    let mut alphas = vec![("alpha", cfg.alpha)];
    if subcommand == Subcommand::Scaling || subcommand == Subcommand::Resonance {
        alphas.extend(cfg.alpha_list.iter().map(|&a| ("alpha_list", a)));
    }
    let e = if uses_dicke {
        Some(dicke_e_script(cfg)?)
    } else if subcommand == Subcommand::Resonance {
        if cfg.d < 3 {
            return Err(ConfigError::new(
                "d",
                format!("ground-state condition alpha^2 E < m fails: E diverges in d = {}", cfg.d),
            ));
        }
        let it = ResolventIntegrand::new(CouplingProfile::new(cfg.k_amp, cfg.uv_shape, cfg.d), cfg.lambda)
            .map_err(|e| ConfigError::new("d", e.to_string()))?;
        Some(it.e_script())
    } else {
        None
    };
    if let Some(e) = e {
        for (key, a) in alphas {
            if a * a * e >= cfg.m {
                return Err(ConfigError::new(
                    key,
                    format!(
                        "ground-state condition alpha^2 E < m violated: alpha^2 E = {:.6e} >= m = {:e} \
                         (pass --allow-critical to run anyway)",
                        a * a * e,
                        cfg.m
                    ),
                ));
            }
        }
    }
    Ok(())
}
