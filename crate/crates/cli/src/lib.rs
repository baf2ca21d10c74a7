//! Command-line front end for the adiabatic scaling experiments.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod records;

use std::ffi::OsString;
use std::path::PathBuf;

use adiabat::grid::QuadratureRule;
use adiabat::resonance::SolveMethod;
use clap::{Args, Parser, ValueEnum};

use crate::config::{read_config_file, resolve, Family, FileConfig, Overrides, Subcommand};
use crate::error::{CliError, EXIT_CONFIG, EXIT_FAILURE};

#[derive(Debug, Parser)]
#[command(name = "adiabat", version, about = "Adiabatic evolution without a gap: sweeps, resonances and identity checks")]
pub struct Cli {
    /// TOML config file (JSON when the name ends in .json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for tau sweeps (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Run even when alpha^2 E >= m.
    #[arg(long, global = true)]
    pub allow_critical: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Sweep the two-level family.
    TwoLevel(ModelArgs),
    /// Commutator solution and sweep of the Friedrichs family.
    Friedrichs(ModelArgs),
    /// Commutator solutions, spectrum and sweep of the Dicke family.
    Dicke(ModelArgs),
    /// Resonance of the continued resolvent, optionally over a list of alpha.
    Resonance {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated alpha values.
        #[arg(long, value_delimiter = ',')]
        alpha_scan: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Sweep one family and fit the decay laws.
    Scaling {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        family: Option<Family>,
        /// Comma-separated alpha values for the Dicke time-scale probe.
        #[arg(long, value_delimiter = ',')]
        alpha_list: Option<Vec<f64>>,
    },
    /// Machine-precision identity suite; exit 3 on any failure.
    Verify(ModelArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub k_amp: Option<f64>,
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Modes of the Friedrichs grid.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Modes of the Dicke grid.
    #[arg(long)]
    pub dicke_modes: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    /// Comma-separated tau values.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    /// Comma-separated infrared cutoffs.
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    Midpoint,
    GaussLegendre,
    LogMidpoint,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    FixedPoint,
    Newton,
}

impl ModelArgs {
    fn overrides(self) -> Overrides {
        Overrides {
            d: self.d,
            m: self.m,
            alpha: self.alpha,
            k_amp: self.k_amp,
            k_min: self.k_min,
            lambda: self.lambda,
            modes: self.modes,
            dicke_modes: self.dicke_modes,
            n_max: self.n_max,
            rule: self.rule.map(|r| match r {
                RuleArg::Midpoint => QuadratureRule::Midpoint,
                RuleArg::GaussLegendre => QuadratureRule::GaussLegendre,
                RuleArg::LogMidpoint => QuadratureRule::LogMidpoint,
            }),
            taus: self.taus,
            eps_list: self.eps_list,
            seed: self.seed,
            ..Overrides::default()
        }
    }
}

impl Command {
    fn split(self) -> (Subcommand, Overrides) {
        match self {
            Command::TwoLevel(a) => (Subcommand::TwoLevel, a.overrides()),
            Command::Friedrichs(a) => (Subcommand::Friedrichs, a.overrides()),
            Command::Dicke(a) => (Subcommand::Dicke, a.overrides()),
            Command::Verify(a) => (Subcommand::Verify, a.overrides()),
            Command::Resonance {
                model,
                alpha_scan,
                method,
            } => (
                Subcommand::Resonance,
                Overrides {
                    alpha_list: alpha_scan,
                    method: method.map(|m| match m {
                        MethodArg::FixedPoint => SolveMethod::FixedPoint,
                        MethodArg::Newton => SolveMethod::Newton,
                    }),
                    ..model.overrides()
                },
            ),
            Command::Scaling {
                model,
                family,
                alpha_list,
            } => (
                Subcommand::Scaling,
                Overrides {
                    family,
                    alpha_list,
                    ..model.overrides()
                },
            ),
        }
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("adiabat: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    adiabat::linalg::set_sequential_kernels();
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => FileConfig::default(),
    };
    let (subcommand, overrides) = cli.command.split();
    let cfg = resolve(file, overrides, subcommand, cli.allow_critical)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(config::ConfigError::new("--workers", "need at least one worker").into());
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    let out = cli.out;
    let result = pool.install(|| commands::run(subcommand, &cfg, &out));
    if let Err(e) = &result {
        if e.exit_code() == EXIT_FAILURE {
            eprintln!("adiabat: run failed for subcommand {}", subcommand.name());
        }
    }
    result
}
