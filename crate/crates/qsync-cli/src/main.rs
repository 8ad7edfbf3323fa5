//! `qsync` binary: exact single-excitation dynamics of a frequency-modulated
//! qubit in a Lorentzian reservoir, with Husimi phase portraits, the
//! synchronization measure S(phi, t) and Bessel-zero drive tuning.
//!
//! Exit codes: 0 success, 2 invalid input (bad flags, config, or file IO),
//! 3 solver divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qsync::analysis::{SweepObservable, SweepVariable};
use qsync::error::Error;
use qsync_cli::commands::{self, DEFAULT_EPSILON, DEFAULT_N_PHI, DEFAULT_N_THETA};
use qsync_cli::config::{OutputFormat, RunConfig};
use qsync_cli::figures::FIGURE_IDS;

#[derive(Parser)]
#[command(
    name = "qsync",
    version,
    about = "Single-excitation dynamics of a frequency-modulated qubit in a \
             Lorentzian reservoir: amplitude decay, Husimi phase portraits, \
             synchronization measure, Bessel-zero drive tuning"
)]
struct Cli {
    /// Output directory (falls back to $QSYNC_OUT_DIR, then ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dataset format, overriding the config's `output_format`
    #[arg(long, value_enum, global = true)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the excited-state amplitude B(t) and write the trajectory
    Simulate {
        /// Path to a `key = value` config file
        #[arg(long)]
        config: PathBuf,
        /// Cross-check against the Volterra quadrature route and record the
        /// sup-norm disagreement
        #[arg(long)]
        verify: bool,
    },
    /// Evaluate the synchronization measure S(phi, t) and its lifetime
    Sync {
        /// Path to a `key = value` config file
        #[arg(long)]
        config: PathBuf,
        /// Lifetime threshold on |S|
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Observation phase, overriding the config's `phi`
        #[arg(long)]
        phi: Option<f64>,
        /// Cross-check against the Volterra quadrature route
        #[arg(long)]
        verify: bool,
    },
    /// Husimi Q meshes on the Bloch sphere at chosen snapshot times
    Qfunc {
        /// Path to a `key = value` config file
        #[arg(long)]
        config: PathBuf,
        /// Snapshot times (gamma t), comma separated, each inside the
        /// simulated window; defaults to the end of the window
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        times: Vec<f64>,
        /// Polar mesh points (inclusive of both poles)
        #[arg(long, default_value_t = DEFAULT_N_THETA)]
        n_theta: usize,
        /// Azimuthal mesh points (periodic, endpoint excluded)
        #[arg(long, default_value_t = DEFAULT_N_PHI)]
        n_phi: usize,
        /// Cross-check against the Volterra quadrature route
        #[arg(long)]
        verify: bool,
    },
    /// Rerun the configured window per swept value and record an observable
    Sweep {
        /// Path to a `key = value` config file
        #[arg(long)]
        config: PathBuf,
        /// Parameter the sweep varies
        #[arg(long, value_enum)]
        variable: VariableArg,
        /// Swept values, comma separated
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        /// Lock d = RATIO_LOCK * omega while sweeping omega
        #[arg(long)]
        ratio_lock: Option<f64>,
        #[arg(long, value_enum, default_value_t = ObservableArg::Sync)]
        observable: ObservableArg,
        /// Polar mesh points for the qgrid observable
        #[arg(long, default_value_t = DEFAULT_N_THETA)]
        n_theta: usize,
        /// Azimuthal mesh points for the qgrid observable
        #[arg(long, default_value_t = DEFAULT_N_PHI)]
        n_phi: usize,
        /// Re-run a subset of rows through the Volterra quadrature route
        /// and record the disagreement
        #[arg(long)]
        verify: bool,
    },
    /// Emit the data files and gnuplot script for a canned figure
    Figures {
        /// Figure id: fig2 through fig8
        id: String,
    },
    /// Print the first positive zeros of the Bessel function J_order
    Zeros {
        /// Bessel function order n of J_n
        #[arg(long, default_value_t = 0)]
        order: u32,
        /// How many leading zeros to print
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariableArg {
    Omega,
    D,
    Ratio,
}

impl From<VariableArg> for SweepVariable {
    fn from(v: VariableArg) -> Self {
        match v {
            VariableArg::Omega => SweepVariable::Omega,
            VariableArg::D => SweepVariable::D,
            VariableArg::Ratio => SweepVariable::Ratio,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ObservableArg {
    Sync,
    Amplitude,
    Qgrid,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("QSYNC_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load_config(path: &Path, format: Option<FormatArg>) -> qsync::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    // Fold the override into the config so the metadata sidecar (which
    // embeds the canonical config) still re-runs the command exactly.
    if let Some(f) = format {
        cfg.output_format = f.into();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> qsync::Result<()> {
    let out = out_dir(cli.out);
    let format = cli.format;
    match cli.command {
        Command::Simulate { config, verify } => {
            commands::cmd_simulate(&load_config(&config, format)?, &out, verify)
        }
        Command::Sync {
            config,
            epsilon,
            phi,
            verify,
        } => {
            let mut cfg = load_config(&config, format)?;
            if let Some(phi) = phi {
                cfg.phi = phi;
            }
            commands::cmd_sync(&cfg, &out, epsilon, verify)
        }
        Command::Qfunc {
            config,
            times,
            n_theta,
            n_phi,
            verify,
        } => commands::cmd_qfunc(
            &load_config(&config, format)?,
            &out,
            &times,
            n_theta,
            n_phi,
            verify,
        ),
        Command::Sweep {
            config,
            variable,
            values,
            ratio_lock,
            observable,
            n_theta,
            n_phi,
            verify,
        } => {
            let observable = match observable {
                ObservableArg::Sync => SweepObservable::Sync,
                ObservableArg::Amplitude => SweepObservable::Amplitude,
                ObservableArg::Qgrid => SweepObservable::QSnapshot { n_theta, n_phi },
            };
            commands::cmd_sweep(
                &load_config(&config, format)?,
                &out,
                variable.into(),
                values,
                ratio_lock,
                observable,
                verify,
            )
        }
        Command::Figures { id } => {
            // Surface the valid ids on the error path; recipes also embed
            // them, but the hint belongs to the CLI layer.
            if !FIGURE_IDS.contains(&id.as_str()) {
                return Err(Error::invalid(format!(
                    "unknown figure id '{id}'; valid ids: {}",
                    FIGURE_IDS.join(", ")
                )));
            }
            commands::cmd_figures(&id, &out, format.map(Into::into).unwrap_or(OutputFormat::Csv))
        }
        Command::Zeros { order, count } => commands::cmd_zeros(order, count),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidInput(_) => ExitCode::from(2),
                Error::SolverDivergence(_) => ExitCode::from(3),
            }
        }
    }
}
