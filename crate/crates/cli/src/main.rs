//! `wqed`: figure-data generator for a moving emitter in a coupled-cavity waveguide.

mod commands;
mod output;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wqed::{Branch, ModelParams, WqedError, DEFAULT_L};

#[derive(Parser)]
#[command(name = "wqed", version, about = "Single-excitation waveguide QED with a moving emitter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Photon hopping
    #[arg(long = "J", default_value_t = 1.0, allow_negative_numbers = true)]
    j: f64,
    /// Qubit hopping
    #[arg(long = "Jp", allow_negative_numbers = true)]
    jp: f64,
    /// Qubit level splitting
    #[arg(long = "Delta", allow_negative_numbers = true)]
    delta: f64,
    /// Photon-qubit coupling
    #[arg(long = "Omega", allow_negative_numbers = true)]
    omega: f64,
    /// Number of lattice sites (even)
    #[arg(long = "L", default_value_t = DEFAULT_L)]
    l: usize,
}

impl ParamArgs {
    pub fn build(&self) -> Result<ModelParams, WqedError> {
        ModelParams::new(self.j, self.jp, self.delta, self.omega, self.l)
    }
}

#[derive(Args, Debug, Clone)]
pub struct MapArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Points along k_i over [-pi, pi]
    #[arg(long, default_value_t = 101)]
    nk: usize,
    /// Points along p_i over [-pi, pi]
    #[arg(long, default_value_t = 101)]
    np: usize,
    /// Output stem; writes <out>.csv and <out>.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum BranchArg {
    Lower,
    Upper,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Lower => Branch::Lower,
            BranchArg::Upper => Branch::Upper,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Single-photon scattering amplitudes at one (k_i, p_i)
    Scatter {
        #[command(flatten)]
        params: ParamArgs,
        /// Initial qubit momentum
        #[arg(long, allow_negative_numbers = true)]
        ki: f64,
        /// Initial photon momentum
        #[arg(long = "pi", allow_negative_numbers = true)]
        p_i: f64,
        #[arg(long, default_value = "scatter")]
        out: PathBuf,
    },
    /// Transmission |t|^2 over the (k_i, p_i) plane
    MapTransmission(MapArgs),
    /// Final photon and qubit momenta and qubit energy change over the (k_i, p_i) plane
    MapRecoil(MapArgs),
    /// Both bound-state branches versus total momentum
    BoundEnergies {
        #[command(flatten)]
        params: ParamArgs,
        /// Points along K over [-pi, pi]
        #[arg(long, default_value_t = 201)]
        nk: usize,
        #[arg(long, default_value = "bound_energies")]
        out: PathBuf,
    },
    /// Relative-coordinate photon profile of one bound state
    BoundWavefunction {
        #[command(flatten)]
        params: ParamArgs,
        /// Total momentum
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        #[arg(long, value_enum, default_value_t = BranchArg::Upper)]
        branch: BranchArg,
        /// Largest |x| written
        #[arg(long, default_value_t = 50)]
        xmax: usize,
        #[arg(long, default_value = "bound_wavefunction")]
        out: PathBuf,
    },
    /// Spontaneous emission of a qubit prepared with total momentum K
    EmitFixedK {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 0.5)]
        dt: f64,
        #[arg(long, default_value = "emit_fixed_k")]
        out: PathBuf,
    },
    /// Spontaneous emission of a qubit localized at one site
    EmitLocalized {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        x0: i64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        /// Times at which position-space profiles are written; defaults to tmax
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        #[arg(long, default_value = "emit_localized")]
        out: PathBuf,
    },
    /// Emission regime, K windows and critical couplings
    Windows {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "windows")]
        out: PathBuf,
    },
    /// Fast internal consistency checks
    Selfcheck {
        #[arg(long, default_value = "selfcheck")]
        out: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    Core(WqedError),
    Io(std::io::Error),
    Csv(csv::Error),
    Json(serde_json::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::Csv(e) => write!(f, "CSV error: {e}"),
            CliError::Json(e) => write!(f, "JSON error: {e}"),
        }
    }
}

impl From<WqedError> for CliError {
    fn from(e: WqedError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl CliError {
    /// 3 for numerical failures, 2 for anything the caller asked for wrongly.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            _ => 1,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("WQED_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            WqedError::InvalidParams(format!("WQED_THREADS must be a positive integer (got {raw:?})"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| WqedError::NumericalFailure(format!("thread pool: {e}")))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Scatter { params, ki, p_i, out } => commands::scatter(&params.build()?, ki, p_i, &out),
        Command::MapTransmission(m) => commands::map(&m, "map-transmission", "transmission_map"),
        Command::MapRecoil(m) => commands::map(&m, "map-recoil", "recoil_map"),
        Command::BoundEnergies { params, nk, out } => commands::bound_energies(&params.build()?, nk, &out),
        Command::BoundWavefunction { params, k, branch, xmax, out } => {
            commands::bound_wavefunction(&params.build()?, k, branch.into(), xmax, &out)
        }
        Command::EmitFixedK { params, k, tmax, dt, out } => {
            commands::emit_fixed_k(&params.build()?, k, tmax, dt, &out)
        }
        Command::EmitLocalized { params, x0, tmax, dt, snapshots, out } => {
            commands::emit_localized(&params.build()?, x0, tmax, dt, &snapshots, &out)
        }
        Command::Windows { params, out } => commands::windows(&params.build()?, &out),
        Command::Selfcheck { out } => selfcheck::run(&out),
    }
}

fn main() -> ExitCode {
    output::start_clock();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wqed: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
