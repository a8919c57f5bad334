use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Quasi-phase-matching, response and photon-counting tools for tunable
/// up-conversion detectors.
///
/// Without --config the bundled device configuration is used.
#[derive(Debug, Parser)]
#[command(name = "upconv", version)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file, `-` for standard output.
    #[arg(long, global = true, default_value = "-")]
    pub out: String,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for Monte Carlo commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refractive index lookup.
    Index(IndexArgs),
    /// Phase matching: solvers, acceptance spectra, tuning.
    #[command(subcommand)]
    Qpm(QpmCommand),
    /// Efficiency and noise versus pump power.
    #[command(subcommand)]
    Response(ResponseCommand),
    /// Photon counting simulation.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Multi-pump channel planning.
    #[command(subcommand)]
    Plan(PlanCommand),
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub wavelength_um: f64,
    #[arg(long)]
    pub temperature_c: f64,
    /// Coefficient set JSON; defaults to the built-in congruent LN set.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    /// Use the crystal's waveguide index model (bulk + offsets).
    #[arg(long)]
    pub effective: bool,
}

/// Overrides applied to the configured crystal.
#[derive(Debug, Args, Default)]
pub struct CrystalOverrides {
    #[arg(long)]
    pub temperature_c: Option<f64>,
    #[arg(long)]
    pub poling_um: Option<f64>,
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long)]
    pub length_cm: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum QpmCommand {
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Normalized efficiency versus signal wavelength at one pump.
    Acceptance {
        #[arg(long)]
        pump: Option<f64>,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[command(flatten)]
        crystal: CrystalOverrides,
    },
    /// Derivative of the phase-matched signal wavelength.
    TuneSlope {
        #[arg(long)]
        pump: Option<f64>,
        #[arg(long, value_enum, default_value = "pump")]
        variable: SlopeVariable,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        bracket: Option<Vec<f64>>,
        #[command(flatten)]
        crystal: CrystalOverrides,
    },
    /// Envelope of acceptance spectra for several pump wavelengths.
    Envelope {
        #[arg(long)]
        pump_min: Option<f64>,
        #[arg(long)]
        pump_max: Option<f64>,
        #[arg(long, default_value_t = 3)]
        n_pumps: usize,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[command(flatten)]
        crystal: CrystalOverrides,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SlopeVariable {
    Pump,
    Temperature,
}

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    Signal {
        #[arg(long)]
        pump: Option<f64>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        bracket: Option<Vec<f64>>,
        #[command(flatten)]
        crystal: CrystalOverrides,
    },
    Pump {
        #[arg(long)]
        signal: f64,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        bracket: Option<Vec<f64>>,
        #[command(flatten)]
        crystal: CrystalOverrides,
    },
    Poling {
        #[arg(long)]
        signal: f64,
        #[arg(long)]
        pump: Option<f64>,
        #[command(flatten)]
        crystal: CrystalOverrides,
    },
    Temperature {
        #[arg(long)]
        signal: f64,
        #[arg(long)]
        pump: Option<f64>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        bracket: Option<Vec<f64>>,
        #[command(flatten)]
        crystal: CrystalOverrides,
    },
}

#[derive(Debug, Subcommand)]
pub enum ResponseCommand {
    /// Efficiency and noise over a pump power grid.
    Curve {
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, default_value_t = 0.2)]
        p_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Fit a noise model to measured (power, rate) points.
    Calibrate {
        /// `POWER_W,RATE_HZ`, repeatable.
        #[arg(long = "point", required = true)]
        points: Vec<String>,
        #[arg(long, default_value_t = 100.0)]
        dark: f64,
        #[arg(long)]
        quadratic: bool,
    },
}

#[derive(Debug, Args, Default)]
pub struct SimOverrides {
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub signal_rate: Option<f64>,
    #[arg(long)]
    pub efficiency: Option<f64>,
    #[arg(long)]
    pub dark_rate: Option<f64>,
    #[arg(long)]
    pub dead_time_ns: Option<f64>,
    #[arg(long)]
    pub jitter_sigma_ps: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Simulate detection timestamps.
    Counts {
        #[command(flatten)]
        sim: SimOverrides,
    },
    /// Simulate a pulse train and histogram the timing residuals.
    Jitter {
        #[arg(long, default_value_t = 100_000)]
        pulses: usize,
        #[arg(long, default_value_t = 1000.0)]
        period_ns: f64,
        #[arg(long, default_value_t = 1.0)]
        bin_ps: f64,
        #[command(flatten)]
        sim: SimOverrides,
    },
}

#[derive(Debug, Subcommand)]
pub enum PlanCommand {
    /// Tile a signal band with equal-width channels.
    Band {
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        width: f64,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        pump_bracket: Option<Vec<f64>>,
    },
    /// Check a plan's pump centres against the configured pump's tuning range.
    Validate {
        #[arg(long)]
        plan: PathBuf,
    },
}
