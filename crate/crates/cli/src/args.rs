use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pvsmooth", version, about = "Smoothing-battery sizing for PV-diesel microgrids")]
pub struct Cli {
    /// key = value (TOML) file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for per-day work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Daily SIVI for every valid day.
    Sivi {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-day optimal capacity, its distribution and the SIVI regression.
    Size {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Capacity from the SIVI regression alone.
    Estimate(EstimateArgs),
    /// Capacity from four sizing methods and the coverage each achieves.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Regression coefficients (alpha=, beta=, sigma=); fitted on the data when absent.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Re-size the year for each value of one parameter.
    Sensitivity {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// ma_window, rr_limit, dod or soc_init.
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. 0.8,0.7,0.6,0.5.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit kinetic battery constants to a constant-current discharge table.
    FitBattery {
        /// CSV with header `hours,amps`.
        #[arg(long)]
        curve: PathBuf,
        /// Constants file to write; printed to stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic dataset (site.txt, irradiance.csv, temperature.csv).
    Synth(SynthArgs),
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Directory holding site.txt, irradiance.csv and temperature.csv.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub site: Option<PathBuf>,
    #[arg(long)]
    pub irradiance: Option<PathBuf>,
    #[arg(long)]
    pub temperature: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Ma,
    Rr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceArg {
    /// Ramp measured against the previous smoothed output.
    Smoothed,
    /// Ramp measured against the previous raw PV sample.
    Raw,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Moving-average window, minutes.
    #[arg(long, conflicts_with = "rr_limit")]
    pub ma_window: Option<usize>,
    /// Ramp-rate limit per minute as a fraction of nominal power.
    #[arg(long)]
    pub rr_limit: Option<f64>,
    #[arg(long, value_enum)]
    pub rr_reference: Option<ReferenceArg>,

    /// Probability of non-exceedance used to pick the capacity.
    #[arg(long)]
    pub pone: Option<f64>,
    #[arg(long)]
    pub dod: Option<f64>,
    #[arg(long)]
    pub soc_init: Option<f64>,
    #[arg(long)]
    pub soc_max: Option<f64>,
    #[arg(long)]
    pub eta_conv: Option<f64>,
    /// Kinetic battery constants file (as written by fit-battery).
    #[arg(long)]
    pub kibam: Option<PathBuf>,

    /// PV nominal rating, Wp.
    #[arg(long)]
    pub p_nom: Option<f64>,
    #[arg(long)]
    pub k_e: Option<f64>,
    #[arg(long)]
    pub k_m: Option<f64>,
    /// Power-temperature coefficient, per degree C.
    #[arg(long)]
    pub k_pt: Option<f64>,
    #[arg(long)]
    pub eta_inv: Option<f64>,

    /// Bisection tolerance, kWh/kWp.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest capacity tried per day, kWh/kWp.
    #[arg(long)]
    pub upper: Option<f64>,
    /// Largest capacity tried by the hourly year-long simulation, kWh/kWp.
    #[arg(long)]
    pub hourly_upper: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub sivi: f64,
    /// Coefficients file (alpha=, beta=, sigma=).
    #[arg(long, conflicts_with_all = ["alpha", "beta", "sigma"])]
    pub coeffs: Option<PathBuf>,
    #[arg(long, requires_all = ["beta", "sigma"])]
    pub alpha: Option<f64>,
    #[arg(long, requires_all = ["alpha", "sigma"])]
    pub beta: Option<f64>,
    #[arg(long, requires_all = ["alpha", "beta"])]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    /// Seeded mix of clear, overcast and cloudy days.
    Year,
    Clear,
    Mixed,
    Overcast,
    SquareWave,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Site file to synthesise for; defaults to an arid inland site.
    #[arg(long)]
    pub site: Option<PathBuf>,
    #[arg(long, default_value_t = 2017)]
    pub year: i32,
    #[arg(long, default_value_t = 2017)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Year)]
    pub profile: ProfileArg,
    /// Square-wave period, minutes.
    #[arg(long, default_value_t = 60)]
    pub period: u32,
    /// Number of days from 1 January (default: the whole year).
    #[arg(long)]
    pub days: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}
