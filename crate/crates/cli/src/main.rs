use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use parabolic::Error;

mod commands;

/// Exact lattice, wall and Lie-closure computations for parabolic classes
/// on hyperkähler lattices.
///
/// Lattice arguments accept a preset name (K3, K3n(n), Kumn(n), OG6, OG10)
/// or a path to a lattice JSON file. Exit codes: 0 success or rigid,
/// 1 internal error, 2 invalid input, 3 indeterminate sign or exhausted
/// budget, 4 inconclusive verdict.
#[derive(Debug, Parser)]
#[command(name = "parabolic", version)]
pub struct Cli {
    /// Bisection rounds allowed when certifying signs of symbolic scalars.
    #[arg(long, global = true, default_value_t = 64)]
    pub precision_budget: u32,
    /// Random seed for sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattice reports.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
    /// Rational kernel of a class, or leaf density of a torus foliation.
    Kernel {
        /// Lattice preset or file (not used with --leaf).
        #[arg(long, required_unless_present = "leaf")]
        lattice: Option<String>,
        /// Vector JSON of the class u.
        #[arg(long, required_unless_present = "leaf", conflicts_with = "leaf")]
        vector: Option<PathBuf>,
        /// Vector family JSON of foliation directions; uses the standard pairing.
        #[arg(long)]
        leaf: Option<PathBuf>,
    },
    /// Lie closure of the radical algebra of a period point.
    Closure {
        #[arg(long)]
        lattice: String,
        /// Vector family JSON spanning L (at most two vectors).
        #[arg(long)]
        plane: PathBuf,
        /// Vector JSON of the isotropic class u.
        #[arg(long)]
        class: PathBuf,
        /// Subspace JSON of a rational W containing L and u.
        #[arg(long)]
        restrict: Option<PathBuf>,
        /// Writes the closed bivector basis to this file.
        #[arg(long)]
        emit_basis: Option<PathBuf>,
    },
    /// Walls through the neighbourhood of a positive class.
    Walls {
        /// Hyperbolic lattice of signature (1, n).
        #[arg(long)]
        lattice: String,
        /// Vector JSON of the center h.
        #[arg(long)]
        center: PathBuf,
        /// MBM bound M.
        #[arg(long)]
        bound: u64,
        /// Subspace JSON restricting candidate classes.
        #[arg(long)]
        subspace: Option<PathBuf>,
        /// Cross-checks against the brute-force box scan.
        #[arg(long)]
        oracle: bool,
    },
    /// Local nef test of a class against a reference Kähler class.
    Nef {
        /// Hyperbolic lattice of signature (1, n).
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        class: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        bound: u64,
        /// Subspace JSON H0 for an isotropic class (requires --direction).
        #[arg(long, requires = "direction")]
        subspace: Option<PathBuf>,
        /// Vector JSON (rational) of the shift direction z for an isotropic class.
        #[arg(long, requires = "subspace")]
        direction: Option<PathBuf>,
    },
    /// Classifies an isometry (--lattice, --matrix) or a parabolic class
    /// against a Hodge setup (--setup, --class).
    Classify {
        #[arg(long, conflicts_with = "setup", required_unless_present = "setup")]
        lattice: Option<String>,
        #[arg(long, requires = "lattice")]
        matrix: Option<PathBuf>,
        #[arg(long, requires = "class")]
        setup: Option<PathBuf>,
        #[arg(long, requires = "setup")]
        class: Option<PathBuf>,
        /// Also runs the matching Lie-closure certificate.
        #[arg(long, requires = "setup")]
        certificate: bool,
    },
    /// Random-walk orbit of a boundary class under a group.
    Orbit {
        #[arg(long)]
        lattice: String,
        /// Generators JSON {"generators": [[[int]]]}.
        #[arg(long)]
        gens: PathBuf,
        #[arg(long)]
        start: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 4)]
        chains: u32,
        #[arg(long, default_value_t = 24)]
        max_word: usize,
        /// Writes the trace JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the orbit experiment from a rational and an irrational start.
    Dichotomy {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        gens: PathBuf,
        #[arg(long)]
        rational: PathBuf,
        #[arg(long)]
        irrational: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 4)]
        chains: u32,
        #[arg(long, default_value_t = 24)]
        max_word: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum LatticeAction {
    /// Rank, signature, determinant, parity and validation checks.
    Info { lattice: String },
}

/// Command failure, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::Indeterminate(_) | Error::Budget(_)) => 3,
            Failure::Core(_) | Failure::Io(_) => 2,
        }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| commands::run(&cli));
    match result {
        Ok(Ok(out)) => {
            match cli.format {
                Format::Json => print!("{}", parabolic::io::canonical(&out.json)),
                Format::Text => print!("{}", out.text),
            }
            ExitCode::from(out.code)
        }
        Ok(Err(f)) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.code())
        }
        Err(_) => ExitCode::from(1),
    }
}
