use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::Command;
use crate::config::{ExperimentConfig, Origin};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wearcov", version, about = "SINR coverage of body-blocked mmWave wearables in a reflective room")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Coverage curves, analytic and simulated, one file per density.
    Ccdf(RunArgs),
    /// Average rate against receiver orientation.
    RateOrientation(RunArgs),
    /// Analytic coverage over receiver positions.
    Heatmap(RunArgs),
    /// Run every model cross-check and write a report.
    Validate(RunArgs),
}

impl Cmd {
    pub fn split(self) -> (Command, RunArgs) {
        match self {
            Self::Ccdf(a) => (Command::Ccdf, a),
            Self::RateOrientation(a) => (Command::RateOrientation, a),
            Self::Heatmap(a) => (Command::Heatmap, a),
            Self::Validate(a) => (Command::Validate, a),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, value_name = "U64")]
    pub seed: Option<String>,
    /// Monte Carlo realizations.
    #[arg(long, value_name = "N")]
    pub realizations: Option<String>,
    /// Comma-separated user densities per square meter.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Receiver position: center, corner or X,Y. Repeat for several.
    #[arg(long, value_name = "POS", allow_hyphen_values = true)]
    pub pos: Vec<String>,
    /// Receiver orientation in degrees.
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub psi_deg: Option<String>,
    /// Thresholds in dB as START:STOP:STEP, or a single value.
    #[arg(long, value_name = "A:B:STEP", allow_hyphen_values = true)]
    pub gamma_db: Option<String>,
    /// Noise power relative to transmit power.
    #[arg(long, value_name = "F")]
    pub sigma2: Option<String>,
    /// Worker threads.
    #[arg(long, value_name = "N")]
    pub workers: Option<String>,
    /// Heat-map resolution NXxNY.
    #[arg(long, value_name = "NXxNY")]
    pub grid: Option<String>,
}

impl RunArgs {
    /// Load the config file, if any, then apply flags on top.
    pub fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let pos = (!self.pos.is_empty()).then(|| self.pos.join(";"));
        let flags = [
            ("seed", "--seed", &self.seed),
            ("realizations", "--realizations", &self.realizations),
            ("lambda", "--lambda", &self.lambda),
            ("positions", "--pos", &pos),
            ("psi_deg", "--psi-deg", &self.psi_deg),
            ("gamma_db", "--gamma-db", &self.gamma_db),
            ("sigma2", "--sigma2", &self.sigma2),
            ("workers", "--workers", &self.workers),
            ("grid", "--grid", &self.grid),
        ];
        for (key, flag, value) in flags {
            if let Some(v) = value {
                let origin = Origin {
                    source: flag.to_string(),
                    line: None,
                };
                cfg.set(key, v).map_err(|msg| CliError::config(&origin, key, msg))?;
            }
        }
        Ok(cfg)
    }
}
