//! `surfdom`: command-line driver for representation diagnostics, domination
//! verdicts, harmonic maps, the Ψ map and the verification suites.

mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use surfdom::io::IoError;
use thiserror::Error;

/// Exit status for failures other than a computed verdict.
const EXIT_ERROR: u8 = 3;
/// Exit status for command-line usage errors.
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Lip(#[from] surfdom::lipschitz::LipError),
    #[error(transparent)]
    Psi(#[from] surfdom::psi::PsiError),
    #[error(transparent)]
    Harmonic(#[from] surfdom::harmonic::HarmonicError),
    #[error(transparent)]
    Teich(#[from] surfdom::teichmueller::TeichError),
    #[error(transparent)]
    Surface(#[from] surfdom::surface::SurfaceError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "surfdom", version, about = "Domination, harmonic maps and the Ψ map for closed hyperbolic surfaces")]
pub struct Cli {
    /// Directory for reports and output files.
    #[arg(long, global = true, env = "SURFDOM_OUTPUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// Upper bound on worker threads (computations currently run on one).
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
    #[command(subcommand)]
    pub command: Command,
}

/// Representations are given as a rep file path or `family:params` with
/// family one of trivial, elliptic, common-axis, unipotent, fuchsian, sigma.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relator residual, Euler class, generator types and parabolic detection.
    RepInfo {
        rep: String,
        #[arg(long)]
        allow_residual: bool,
        /// Word-ball radius for the additive spectrum residual.
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
    /// Domination verdict for (j, ρ): exit 0 strictly dominated, 1 not dominated, 2 inconclusive.
    Dominate {
        j: String,
        rho: String,
        #[command(flatten)]
        lip: LipArgs,
        /// Target curvature scale α ≥ 1 (metric g/α²).
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Ψ map: forward solve Φ(X, j) = Φ(X, ρ), or minimise F_{j0,ρ}.
    Psi(PsiArgs),
    /// Bracket of the Thurston distance d_Th(j1, j2).
    Thurston {
        j1: String,
        j2: String,
        #[command(flatten)]
        lip: LipArgs,
    },
    /// Solve the equivariant harmonic map and write mesh, map and iteration log.
    Harmonic {
        /// Domain surface: FN coordinates `l1,l2,l3,t1,t2,t3`.
        #[arg(long = "fn", conflicts_with = "mesh", required_unless_present = "mesh", value_delimiter = ',', allow_hyphen_values = true)]
        fn_coords: Vec<f64>,
        /// Domain mesh file instead of FN coordinates.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Target representation.
        rho: String,
        #[arg(long, default_value_t = 0.4)]
        edge: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Run a verification suite and print its pass/fail table.
    Verify {
        /// busemann, angles, energy, hopf, properness, identity, continuity or all.
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        edge: f64,
        #[arg(long, default_value_t = 2)]
        samples: usize,
        /// Also check a stored mesh file.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Lipschitz bounds (and optionally minimisers of F) along ρ_t = t·ρ, t ∈ [0, 1].
    Continuity {
        j: String,
        /// A scalable family (elliptic, common-axis or unipotent).
        rho: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[command(flatten)]
        lip: LipArgs,
        /// Also track argmin F_{j,ρ_t}, warm-started from `--init`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        init: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct LipArgs {
    /// Word-ball radius for the lower bound.
    #[arg(long, default_value_t = surfdom::lipschitz::DEFAULT_RADIUS)]
    pub radius: usize,
    /// Target edge of the mesh carrying the harmonic upper bound.
    #[arg(long, default_value_t = 0.4)]
    pub edge: f64,
    #[arg(long)]
    pub allow_residual: bool,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[arg(long, conflicts_with = "inverse", required_unless_present = "inverse")]
    pub forward: bool,
    #[arg(long)]
    pub inverse: bool,
    /// TOML experiment config; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Surface X for --forward, as FN coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Fuchsian j0 for --inverse.
    #[arg(long)]
    pub j0: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    /// Starting point for --inverse, as FN coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,
    #[arg(long)]
    pub edge: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
