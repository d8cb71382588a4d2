//! Command-line front end.
//!
//! Exit codes: 1 for I/O failures, 2 for invalid input or configuration, 3
//! for numerical failures (non-PSD matrices, undefined correlation and the
//! like).

mod commands;
mod config;

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::cluster::ClusterError;
use crate::ffpattern::PatternError;
use crate::mimoeval::EvalError;
use crate::radmatrix::{RadMatrixError, Scope};

pub use commands::{
    cmd_capacity, cmd_ecc, cmd_efficiency, cmd_losses, cmd_weights, report, solve, FrequencySolution, REPORT_FILES,
};
pub use config::{AnalysisConfig, CapacitySettings};

/// Output location override read when `--output` is absent.
pub const OUTPUT_ENV: &str = "ANTCLUSTER_OUTPUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => 1,
            Self::Validation(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

fn rad_is_numeric(e: &RadMatrixError) -> bool {
    matches!(
        e,
        RadMatrixError::NonFinite
            | RadMatrixError::NotHermitian(_)
            | RadMatrixError::NotPositive(_)
            | RadMatrixError::NotPassive(_)
    )
}

fn cluster_is_numeric(e: &ClusterError) -> bool {
    match e {
        ClusterError::NotHermitian(_) | ClusterError::ZeroExcitation => true,
        ClusterError::RadMatrix(r) => rad_is_numeric(r),
        _ => false,
    }
}

impl From<RadMatrixError> for CliError {
    fn from(e: RadMatrixError) -> Self {
        if rad_is_numeric(&e) {
            Self::Numeric(e.to_string())
        } else {
            Self::Validation(e.to_string())
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        if cluster_is_numeric(&e) {
            Self::Numeric(e.to_string())
        } else {
            Self::Validation(e.to_string())
        }
    }
}

impl From<PatternError> for CliError {
    fn from(e: PatternError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let numeric = match &e {
            EvalError::InconsistentFieldData(_)
            | EvalError::UndefinedCorrelation { .. }
            | EvalError::NotHermitian(_)
            | EvalError::NotPositive(_) => true,
            EvalError::RadMatrix(r) => rad_is_numeric(r),
            EvalError::Cluster(c) => cluster_is_numeric(c),
            _ => false,
        };
        if numeric {
            Self::Numeric(e.to_string())
        } else {
            Self::Validation(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "antcluster", version, about = "Optimal feed weights and MIMO metrics for antenna clusters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal amplitude and phase per port, with efficiency and TARC.
    Weights(CommonArgs),
    /// Total efficiency of each optimally fed cluster.
    Efficiency(CommonArgs),
    /// Where the power fed into one cluster goes.
    Losses(LossArgs),
    /// Envelope correlation between clusters.
    Ecc(CommonArgs),
    /// Rayleigh-fading ergodic capacity, with ideal MxM baselines.
    Capacity(CommonArgs),
    /// All of the above, one CSV per report, into the output directory.
    Report(LossArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Analysis config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (a directory for `report`); stdout when absent.
    #[arg(long, env = OUTPUT_ENV)]
    pub output: Option<PathBuf>,
    /// Scattering rows used for the radiation matrix.
    #[arg(long, value_enum)]
    pub scope: Option<Scope>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Monte Carlo samples per frequency.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ideal MxM baselines, e.g. `1,2,4,8`.
    #[arg(long, value_delimiter = ',')]
    pub ideal_mimo: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Cluster to feed (defaults to the first one in the config).
    #[arg(long)]
    pub fed_cluster: Option<String>,
}

impl CommonArgs {
    /// Loads the config and applies the command-line overrides.
    pub fn load(&self) -> Result<AnalysisConfig, CliError> {
        let mut cfg = AnalysisConfig::load(&self.config)?;
        if let Some(scope) = self.scope {
            cfg.set_scope(scope);
        }
        let cap = &mut cfg.capacity;
        if let Some(v) = self.snr_db {
            cap.snr_db = v;
        }
        if let Some(v) = self.samples {
            cap.n_samples = v;
        }
        if let Some(v) = self.seed {
            cap.seed = v;
        }
        if let Some(v) = &self.ideal_mimo {
            cap.ideal_mimo = v.clone();
        }
        Ok(cfg)
    }
}

fn emit(csv: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, csv).map_err(|e| CliError::io(path, e)),
        None => io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Weights(a) => emit(&cmd_weights(&a.load()?)?, a.output.as_deref()),
        Command::Efficiency(a) => emit(&cmd_efficiency(&a.load()?)?, a.output.as_deref()),
        Command::Losses(a) => emit(
            &cmd_losses(&a.common.load()?, a.fed_cluster.as_deref())?,
            a.common.output.as_deref(),
        ),
        Command::Ecc(a) => emit(&cmd_ecc(&a.load()?)?, a.output.as_deref()),
        Command::Capacity(a) => emit(&cmd_capacity(&a.load()?)?, a.output.as_deref()),
        Command::Report(a) => {
            let dir = a
                .common
                .output
                .as_deref()
                .ok_or_else(|| CliError::Validation(format!("report needs --output or {OUTPUT_ENV}")))?;
            report(&a.common.load()?, a.fed_cluster.as_deref(), dir)
        }
    }
}
