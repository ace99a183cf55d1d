//! Command-line front end. Resolves the run configuration, executes one
//! subcommand, writes the output directory, and maps verdicts to exit
//! codes: 0 all pass, 1 a verdict failed or the run broke down, 2 the
//! configuration was rejected before any computation.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};

use config::{load_file, FileConfig, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// The request itself is out of contract; nothing was computed.
    Config(String),
    /// The computation started and failed or refused a bound.
    Run(String),
}

impl From<mpstab::Error> for CliError {
    fn from(e: mpstab::Error) -> Self {
        use mpstab::Error::*;
        match e {
            InvalidInput(_) | CapExceeded(_) | DimensionMismatch(_) => {
                CliError::Config(e.to_string())
            }
            NotGeneric(_) | NonUnital(_) | NoConvergence(_) | BoundViolated(_) | NonFinite(_) => {
                CliError::Run(e.to_string())
            }
        }
    }
}

/// Options shared by every subcommand. Flags override environment
/// variables, which override config-file keys.
#[derive(Debug, Args)]
pub struct Flags {
    /// Model: "aklt", "random", or a path to a tensor JSON file.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Seed for the random model.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Physical dimension of the random model.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Bond dimension of the random model.
    #[arg(long, global = true)]
    pub bond: Option<usize>,
    /// Output directory (default runs/<subcommand>).
    #[arg(long, global = true)]
    pub out_dir: Option<String>,
    /// Worker threads; 0 keeps the library default.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Block length for decompose and phase-path.
    #[arg(long, global = true)]
    pub l: Option<usize>,
    /// Number of blocks on the ring for decompose and phase-path.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Block lengths for block and converge.
    #[arg(long, global = true, value_delimiter = ',')]
    pub l_list: Option<Vec<usize>>,
    /// Ring sizes for parent-gap and sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Interaction span; default is the shortest span that pins the state.
    #[arg(long, global = true)]
    pub span: Option<usize>,
    /// Sites each random perturbation acts on.
    #[arg(long, global = true)]
    pub range: Option<usize>,
    /// Perturbation seeds for sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Perturbation strengths as fractions of the smallest unperturbed gap.
    #[arg(long, global = true, value_delimiter = ',')]
    pub beta_fracs: Option<Vec<f64>>,
    /// Absolute perturbation strengths; overrides beta-fracs.
    #[arg(long, global = true, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    /// Interpolation steps for phase-path.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Largest block length tried by g1.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Shortest block length whose matrix products span the bond algebra.
    G1,
    /// Canonical form: bond spectrum, scale, unitality defect.
    Canon,
    /// Group sites into blocks and check the grouped channel.
    Block,
    /// Transfer-operator spectrum and second eigenvalue.
    Spectrum,
    /// Fit the ground-projector convergence rate against log λ₂.
    Converge,
    /// Spectral gaps of the parent Hamiltonian on rings.
    ParentGap,
    /// Split the rotated Hamiltonian into a commuting backbone plus
    /// controlled corrections and check every piece.
    Decompose,
    /// Gap stability under random local perturbations.
    Sweep,
    /// End-to-end checks on the spin-1 chain against its known values.
    Aklt,
    /// Gap along the interpolation from the backbone to the rotated
    /// Hamiltonian.
    PhasePath,
}

impl Sub {
    fn name(&self) -> &'static str {
        match self {
            Sub::G1 => "g1",
            Sub::Canon => "canon",
            Sub::Block => "block",
            Sub::Spectrum => "spectrum",
            Sub::Converge => "converge",
            Sub::ParentGap => "parent-gap",
            Sub::Decompose => "decompose",
            Sub::Sweep => "sweep",
            Sub::Aklt => "aklt",
            Sub::PhasePath => "phase-path",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mpstab",
    version,
    about = "Parent-Hamiltonian gap toolbox for matrix product states"
)]
struct Cli {
    /// JSON config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Sub,
}

fn run(cli: &Cli) -> Result<report::Outcome, CliError> {
    let name = cli.command.name();
    let file = match &cli.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(file, &cli.flags, name)?;
    cfg.validate(name)?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| CliError::Run(format!("worker pool: {e}")))?;
    }
    let started = SystemTime::now();
    let outcome = match cli.command {
        Sub::G1 => commands::g1(&cfg),
        Sub::Canon => commands::canon(&cfg),
        Sub::Block => commands::block_cmd(&cfg),
        Sub::Spectrum => commands::spectrum(&cfg),
        Sub::Converge => commands::converge(&cfg),
        Sub::ParentGap => commands::parent_gap(&cfg),
        Sub::Decompose => commands::decompose_cmd(&cfg),
        Sub::Sweep => commands::sweep(&cfg),
        Sub::Aklt => commands::aklt(&cfg),
        Sub::PhasePath => commands::phase_path_cmd(&cfg),
    }?;
    report::write_outcome(&cfg.out_dir, name, &outcome, started, cfg.workers)?;
    for v in &outcome.verdicts.0 {
        println!(
            "{}: {} ({})",
            v.name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("summary: {}", cfg.out_dir.join("summary.json").display());
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let failures = outcome.verdicts.failures();
            if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for v in failures {
                    eprintln!("failed: {} ({})", v.name, v.detail);
                }
                ExitCode::from(1)
            }
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("run error: {msg}");
            ExitCode::from(1)
        }
    }
}
