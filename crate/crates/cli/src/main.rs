//! `hencky`: energies, convexity and coercivity scans, and the planar solver.
//!
//! Exit codes: 0 success, 1 a claim expected to hold failed, 2 bad
//! arguments or configuration, 3 `det F ≤ 0` on a stress request,
//! 4 no feasible start for the solver, 5 solver not converged.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::Common;

#[derive(Debug, Parser)]
#[command(name = "hencky", version, about = "Exponentiated Hencky energy laboratory")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energies, stress and invariants at one deformation gradient
    Eval {
        /// F row-major: 4 numbers (2D) or 9 (3D)
        #[arg(required = true, num_args = 1.., allow_negative_numbers = true)]
        f: Vec<f64>,
        /// Require the stress (fails with exit 3 when det F <= 0)
        #[arg(long)]
        stress: bool,
    },
    /// Hessian, Steigmann, volumetric and rank-one convexity scans
    ScanConvexity {
        /// k values for the Hessian and Steigmann checks, e.g. 0.30,1/3
        #[arg(long)]
        k_list: Option<String>,
        /// khat values for the volumetric check
        #[arg(long)]
        khat_list: Option<String>,
        #[arg(long)]
        rank_one: bool,
        #[arg(long)]
        dim: Option<usize>,
        /// exp-hencky, exp-hencky-iso or quadratic-hencky
        #[arg(long)]
        energy: Option<String>,
        /// Rank-one samples
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        stop_at_first: bool,
    },
    /// Coercivity certificates
    ScanCoercivity {
        #[arg(long)]
        q_list: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Scalar inequalities behind the invariant-space convexity
    VerifyAppendix {
        #[arg(long)]
        k_list: Option<String>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Sum-of-squared-logarithms sampler
    Ssli {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Minimize the planar energy under Dirichlet data
    Solve {
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        height: Option<f64>,
        /// Mesh JSON file (overrides the rectangle)
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Affine Dirichlet data a11,a12,a21,a22
        #[arg(long, allow_hyphen_values = true)]
        affine: Option<String>,
        /// Dirichlet data JSON file (overrides --affine)
        #[arg(long)]
        dirichlet: Option<PathBuf>,
        /// gd, qn or newton
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Determinant(String),
    NoFeasibleStart(String),
    NotConverged(String),
    ClaimFailed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::ClaimFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Determinant(_) => 3,
            CliError::NoFeasibleStart(_) => 4,
            CliError::NotConverged(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Determinant(m)
            | CliError::NoFeasibleStart(m)
            | CliError::NotConverged(m)
            | CliError::ClaimFailed(m) => m,
        }
    }
}

impl From<hencky_core::Error> for CliError {
    fn from(e: hencky_core::Error) -> Self {
        use hencky_core::Error as E;
        match e {
            E::NonPositiveDeterminant { .. } => CliError::Determinant(e.to_string()),
            E::NoFeasibleStart { .. } => CliError::NoFeasibleStart(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config::resolve(&cli.common)?;
    match cli.command {
        Command::Eval { f, stress } => commands::eval(&cfg, &f, stress),
        Command::ScanConvexity { k_list, khat_list, rank_one, dim, energy, samples, stop_at_first } => {
            commands::scan_convexity(
                &cfg,
                commands::ConvexityArgs { k_list, khat_list, rank_one, dim, energy, samples, stop_at_first },
            )
        }
        Command::ScanCoercivity { q_list, dim, samples } => commands::scan_coercivity(&cfg, q_list, dim, samples),
        Command::VerifyAppendix { k_list, points } => commands::verify_appendix(&cfg, k_list, points),
        Command::Ssli { dim, trials } => commands::ssli(&cfg, dim, trials),
        Command::Solve { nx, ny, width, height, mesh, affine, dirichlet, method, max_iter, tol } => commands::solve(
            &cfg,
            commands::SolveArgs { nx, ny, width, height, mesh, affine, dirichlet, method, max_iter, tol },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
