//! Command-line front end: bound sweeps, figure presets, channel simulation
//! and self-validation, emitting CSV or JSON datasets.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;
pub mod validate;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Preset;
use crate::config::{RawConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::Table;
use crate::validate::Status;

const UNITS_HELP: &str = "\
Units: times in seconds, distances in length units, sigma2 and diffusion_d in
length^2/second. Information is reported in nats unless --bits is given.

Every flag mirrors a key of the --config file, which holds one `key = value`
per line with `#` comments. Flags override the file.

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 validation failure.";

#[derive(Debug, Parser)]
#[command(name = "mtcsync", version, about, after_help = UNITS_HELP, allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity upper bound with every term, optionally swept.
    UpperBound,
    /// Binary-receiver lower bound for exponential inputs, optionally swept.
    LowerBound,
    /// Raw channel uses under an exponential input law.
    Simulate,
    /// Run the numerical self-checks; exits 4 unless every check passes.
    Validate,
    /// Regenerate a figure dataset.
    Preset {
        #[arg(value_enum)]
        name: PresetName,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PresetName {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Random seed [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true, value_name = "N")]
    pub samples: Option<usize>,
    /// Output format [default: csv].
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Output file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report information in bits.
    #[arg(long, global = true)]
    pub bits: bool,
    /// Use lambda_R = d_R / sigma2 for the clock-receiver link.
    #[arg(long, global = true)]
    pub paper_literal_lambda_r: bool,

    /// Transmitter-receiver distance [default: 1].
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Clock-transmitter distance [default: 1].
    #[arg(long, global = true)]
    pub d_t: Option<f64>,
    /// Clock-receiver distance [default: 1].
    #[arg(long, global = true)]
    pub d_r: Option<f64>,
    /// Information-link drift velocity [default: 1].
    #[arg(long, global = true)]
    pub v_i: Option<f64>,
    /// Clock-link drift velocity [default: 1].
    #[arg(long, global = true)]
    pub v_c: Option<f64>,
    /// Variance of position increments per unit time [default: 1].
    #[arg(long, global = true)]
    pub sigma2: Option<f64>,
    /// Diffusion coefficient D; sets sigma2 = D / 2.
    #[arg(long, global = true)]
    pub diffusion_d: Option<f64>,
    /// Mean input delay.
    #[arg(long, global = true)]
    pub m: Option<f64>,
    /// Bound on the input second moment.
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Second-moment bound as a multiple of m^2.
    #[arg(long, global = true)]
    pub a_over_m2: Option<f64>,
    /// Swept parameter: v_i, v_c, v (all links), m or d_r.
    #[arg(long, global = true)]
    pub sweep: Option<String>,
    /// First sweep value.
    #[arg(long, global = true)]
    pub start: Option<f64>,
    /// Last sweep value.
    #[arg(long, global = true)]
    pub stop: Option<f64>,
    /// Number of sweep values.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Time step of simulated diffusion paths.
    #[arg(long, global = true)]
    pub wiener_dt: Option<f64>,
}

impl Options {
    /// The flags as configuration keys.
    pub fn to_raw(&self) -> CliResult<RawConfig> {
        let mut raw = RawConfig::default();
        let numbers = [
            ("d", self.d),
            ("d_t", self.d_t),
            ("d_r", self.d_r),
            ("v_i", self.v_i),
            ("v_c", self.v_c),
            ("sigma2", self.sigma2),
            ("diffusion_d", self.diffusion_d),
            ("m", self.m),
            ("a", self.a),
            ("a_over_m2", self.a_over_m2),
            ("start", self.start),
            ("stop", self.stop),
            ("wiener_dt", self.wiener_dt),
        ];
        for (key, value) in numbers {
            if let Some(v) = value {
                raw.set(key, &v.to_string())?;
            }
        }
        if let Some(s) = &self.sweep {
            raw.set("sweep", s)?;
        }
        if let Some(p) = self.points {
            raw.set("points", &p.to_string())?;
        }
        if let Some(s) = self.seed {
            raw.set("seed", &s.to_string())?;
        }
        if let Some(n) = self.samples {
            raw.set("samples", &n.to_string())?;
        }
        if let Some(f) = self.format {
            raw.set(
                "format",
                match f {
                    FormatArg::Csv => "csv",
                    FormatArg::Json => "json",
                },
            )?;
        }
        if let Some(p) = &self.out {
            raw.set("out", &p.display().to_string())?;
        }
        if self.bits {
            raw.set("bits", "true")?;
        }
        if self.paper_literal_lambda_r {
            raw.set("lambda_r", "linear")?;
        }
        Ok(raw)
    }

    /// File keys overlaid with flags.
    pub fn raw_config(&self) -> CliResult<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        raw.merge(&self.to_raw()?);
        Ok(raw)
    }
}

fn emit(table: &Table, cfg: &RunConfig) -> CliResult<()> {
    let text = table.render(cfg.format, &cfg.header_comment());
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "stdout".into(),
                    source,
                })
        }
    }
}

/// Executes one command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    let raw = cli.options.raw_config()?;
    match &cli.command {
        Command::UpperBound => {
            let cfg = RunConfig::resolve(&raw)?;
            emit(&commands::run_upper_bound(&cfg)?, &cfg)
        }
        Command::LowerBound => {
            let cfg = RunConfig::resolve(&raw)?;
            emit(&commands::run_lower_bound(&cfg)?, &cfg)
        }
        Command::Simulate => {
            let cfg = RunConfig::resolve(&raw)?;
            emit(&commands::run_simulate(&cfg)?, &cfg)
        }
        Command::Validate => {
            let cfg = RunConfig::resolve(&raw)?;
            let (table, gates) = validate::run_validate(&cfg)?;
            emit(&table, &cfg)?;
            let failed: Vec<&str> = gates
                .iter()
                .filter(|g| g.status != Status::Pass)
                .map(|g| g.name)
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "checks not passed: {}",
                    failed.join(", ")
                )))
            }
        }
        Command::Preset { name } => {
            let preset = match name {
                PresetName::Fig2 => Preset::Fig2,
                PresetName::Fig3 => Preset::Fig3,
                PresetName::Fig4 => Preset::Fig4,
                PresetName::Fig5 => Preset::Fig5,
            };
            let cfg = preset.configure(&raw)?;
            emit(&preset.run(&cfg)?, &cfg)
        }
    }
}
