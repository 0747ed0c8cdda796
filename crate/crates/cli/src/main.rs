//! `ewg-restore` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ewg-restore", version, about = "Coupled electricity, water and gas restoration planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the restoration program and write the plan and report tables.
    Restore(Common),
    /// Run the device-weighted load restoration baseline, then evaluate its delivery.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "power", value_parser = ["power", "count", "percent"])]
        variant: String,
        /// Device weights as `ID=W` pairs, comma separated.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<String>,
        /// Weight of the first device (pumps first, then compressors).
        #[arg(long)]
        w1: Option<f64>,
        /// Weight of the second device.
        #[arg(long)]
        w2: Option<f64>,
        /// Weight of every device not named otherwise.
        #[arg(long, default_value_t = 1.0)]
        default_weight: f64,
    },
    /// Check a saved plan against the physics and write feasibility.csv.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Brute-force optimum over every binary assignment.
    Enumerate {
        #[command(flatten)]
        common: Common,
        /// Largest number of free binaries accepted.
        #[arg(long, default_value_t = ewg_restore::oracle::DEFAULT_BINARY_LIMIT, value_parser = clap::value_parser!(u32).range(0..=24).map(|v| v as usize))]
        limit: usize,
    },
    /// Write the conic program as text.
    ExportConic(Common),
    /// Rebuild the report tables from a saved plan.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Dataset summary.
    Info(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file, or the name of a bundled dataset.
    pub scenario: String,
    /// Output directory; defaults to $EWG_RESTORE_OUT, then ./out.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = nonnegative)]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = unit_interval)]
    pub rel_gap: Option<f64>,
    /// Seconds.
    #[arg(long, value_parser = positive)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    #[arg(long)]
    pub deterministic: Option<bool>,
    #[arg(long)]
    pub symmetry_breaking: bool,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=256).map(|v| v as usize))]
    pub threads: Option<usize>,
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err("must be at least 0".into())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("must be greater than 0".into())
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err("must lie in [0, 1)".into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            commands::report_error(&commands::Failure::input("usage", e.kind().to_string()));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            commands::report_error(&f);
            ExitCode::from(f.code)
        }
    }
}
