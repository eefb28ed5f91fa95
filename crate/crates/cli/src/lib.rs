//! Flag and config-file parsing for the `bbm` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use bbm_core::harness::{ExperimentSpec, Kind, Params, RunOptions};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "bbm", version, about = "Branching Brownian motion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Population size, extremes and W(t) at time t.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Observation time (defaults to the horizon).
        #[arg(long)]
        t: Option<f64>,
    },
    /// First time t >= 1 with R(t) - m(t) > y.
    Crossing {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        y: Vec<f64>,
    },
    /// Lead times of the leftmost and rightmost time-s particles.
    Lead {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
    },
    /// Time until every time-s particle has led.
    Theta {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
    },
    /// First time one of two independent populations leads by more than z.
    TwoBbm {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        z: Vec<f64>,
    },
    /// Number of particles at or below -a t.
    Cohort {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        a: Vec<f64>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Run the invariant suite; --replicates sets the Monte Carlo size.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Log-slope fits of first-passage medians from earlier results.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Results file (repeatable).
        #[arg(long)]
        input: Vec<PathBuf>,
        /// Also write the per-scale points as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Let censored lower bounds enter the medians.
        #[arg(long)]
        include_censored: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, env = "BBM_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    max_particles: Option<usize>,
    /// Drop particles further than this below the leader at each checkpoint.
    #[arg(long)]
    prune_gap: Option<f64>,
    /// Brownian-bridge correction for crossings between checkpoints.
    #[arg(long)]
    bridge_refine: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with defaults for any of these settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record per-replicate wall time (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

/// Settings readable from `--config`. Keys match the long flag names with
/// `_` for `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    replicates: Option<usize>,
    horizon: Option<f64>,
    dt: Option<f64>,
    max_particles: Option<usize>,
    prune_gap: Option<f64>,
    bridge_refine: Option<bool>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    t: Option<f64>,
    y: Option<Vec<f64>>,
    z: Option<Vec<f64>>,
    s: Option<Vec<f64>>,
    a: Option<Vec<f64>>,
    input: Option<Vec<PathBuf>>,
    csv: Option<PathBuf>,
    include_censored: Option<bool>,
}

/// A parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub spec: ExperimentSpec,
    pub options: RunOptions,
}

/// Parse failure with the exit code to use: 0 for `--help`/`--version`, 3
/// otherwise.
#[derive(Debug)]
pub struct ParseFailure {
    pub code: i32,
    pub message: String,
}

fn invalid(message: String) -> ParseFailure {
    ParseFailure { code: 3, message }
}

fn load_config(path: &Path) -> Result<FileConfig, ParseFailure> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("--config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| invalid(format!("--config {}: {e}", path.display())))
}

fn default_replicates(kind: Kind) -> usize {
    match kind {
        Kind::Validate => 20_000,
        Kind::Fit => 1,
        _ => 100,
    }
}

fn default_out(kind: Kind) -> PathBuf {
    match kind {
        Kind::Validate => "validate.json".into(),
        Kind::Fit => "fit.jsonl".into(),
        k => format!("{k}.jsonl").into(),
    }
}

fn list(flag: Vec<f64>, file: Option<Vec<f64>>) -> Vec<f64> {
    if flag.is_empty() {
        file.unwrap_or_default()
    } else {
        flag
    }
}

/// Build the experiment spec from `argv` (program name first). Flags win
/// over the config file, which wins over built-in defaults; `--seed` falls
/// back to `BBM_SEED` before the config file.
pub fn parse_flags<I, T>(argv: I) -> Result<Invocation, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let code = match e.kind() {
            ErrorKind::DisplayHelp
            | ErrorKind::DisplayVersion
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
            _ => 3,
        };
        ParseFailure {
            code,
            message: e.render().to_string(),
        }
    })?;

    let (kind, common, y, z, s, a, t, fit) = match cli.command {
        Command::Simulate { common, t } => (Kind::Simulate, common, vec![], vec![], vec![], vec![], t, None),
        Command::Crossing { common, y } => (Kind::Crossing, common, y, vec![], vec![], vec![], None, None),
        Command::Lead { common, s } => (Kind::Lead, common, vec![], vec![], s, vec![], None, None),
        Command::Theta { common, s } => (Kind::Theta, common, vec![], vec![], s, vec![], None, None),
        Command::TwoBbm { common, z } => (Kind::TwoBbm, common, vec![], z, vec![], vec![], None, None),
        Command::Cohort { common, a, t } => (Kind::Cohort, common, vec![], vec![], vec![], a, t, None),
        Command::Validate { common } => (Kind::Validate, common, vec![], vec![], vec![], vec![], None, None),
        Command::Fit {
            common,
            input,
            csv,
            include_censored,
        } => (
            Kind::Fit,
            common,
            vec![],
            vec![],
            vec![],
            vec![],
            None,
            Some((input, csv, include_censored)),
        ),
    };
    let file = match &common.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    let defaults = Params::default();
    let (input, csv, include_censored) = fit.unwrap_or_default();
    let params = Params {
        horizon: common.horizon.or(file.horizon).unwrap_or(defaults.horizon),
        dt: common.dt.or(file.dt).unwrap_or(defaults.dt),
        max_particles: common
            .max_particles
            .or(file.max_particles)
            .unwrap_or(defaults.max_particles),
        prune_gap: common.prune_gap.or(file.prune_gap),
        bridge_refine: common.bridge_refine || file.bridge_refine.unwrap_or(false),
        y: list(y, file.y),
        z: list(z, file.z),
        s: list(s, file.s),
        a: list(a, file.a),
        t: t.or(file.t),
        input: if input.is_empty() {
            file.input.unwrap_or_default()
        } else {
            input
        },
        include_censored: include_censored || file.include_censored.unwrap_or(false),
        csv: csv.or(file.csv),
    };
    let spec = ExperimentSpec {
        kind,
        params,
        replicates: common
            .replicates
            .or(file.replicates)
            .unwrap_or(default_replicates(kind)),
        master_seed: common.seed.or(file.seed).unwrap_or(0),
        output_path: common.out.or(file.out).unwrap_or_else(|| default_out(kind)),
    };
    spec.validate().map_err(|e| invalid(e.to_string()))?;
    let threads = common.threads.or(file.threads);
    if threads == Some(0) {
        return Err(invalid("--threads must be at least 1".into()));
    }
    Ok(Invocation {
        spec,
        options: RunOptions {
            threads,
            timing: common.timing,
            ..RunOptions::default()
        },
    })
}
