use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

/// Seed used when neither `--seed` nor `COHERENCE_LAB_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Parser)]
#[command(name = "coherence-lab")]
#[command(about = "G-coherence measures, convex roofs, incoherent-channel classification and factorization checks")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    L1,
    G,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RandomKind {
    /// Haar-random pure state
    State,
    /// Ginibre-random density matrix of a given rank
    Mixed,
    /// Random FSIO channel
    Fsio,
}

#[derive(Args, Debug, Clone)]
pub struct SeedArg {
    /// RNG seed
    #[arg(long, env = "COHERENCE_LAB_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArg {
    /// Write the result here instead of stdout
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RoofArgs {
    /// Optimizer restarts
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,

    /// Optimizer tolerance
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    /// Objective-evaluation budget per restart
    #[arg(long, default_value_t = 40_000)]
    pub max_evals: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate l1 and G coherence of a state
    Measure {
        /// State JSON file
        #[arg(short, long)]
        input: PathBuf,

        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,

        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,

        #[command(flatten)]
        output: OutputArg,
    },

    /// Compute an upper bound on the convex roof of G with its ensemble
    Roof {
        /// State JSON file
        #[arg(short, long)]
        input: PathBuf,

        #[command(flatten)]
        roof: RoofArgs,

        #[command(flatten)]
        seed: SeedArg,

        #[command(flatten)]
        output: OutputArg,
    },

    /// Place a Kraus set in the incoherent-operation hierarchy
    Classify {
        /// Kraus-set JSON file
        #[arg(short, long)]
        kraus: PathBuf,

        /// Entries with modulus at or below this count as zero
        #[arg(long, default_value_t = coherence_lab::channels::DEFAULT_ZERO_TOL)]
        zero_tol: f64,

        #[command(flatten)]
        output: OutputArg,
    },

    /// Apply a Kraus set to a state
    Apply {
        /// State JSON file
        #[arg(short, long)]
        input: PathBuf,

        /// Kraus-set JSON file
        #[arg(short, long)]
        kraus: PathBuf,

        #[command(flatten)]
        output: OutputArg,
    },

    /// Run a verification campaign and write the record CSV and summary JSON
    Verify {
        /// Campaign config JSON; flags given explicitly override its fields
        #[arg(long)]
        config: Option<PathBuf>,

        /// Comma-separated dimensions
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,

        /// Trials per dimension
        #[arg(long)]
        trials: Option<usize>,

        /// Master seed (also read from COHERENCE_LAB_SEED)
        #[arg(long, env = "COHERENCE_LAB_SEED")]
        seed: Option<u64>,

        /// Relative equality tolerance for the exact checks
        #[arg(long)]
        tol: Option<f64>,

        /// Include roof-based checks
        #[arg(long)]
        with_roof: bool,

        /// Optimizer restarts for roof-based checks
        #[arg(long)]
        restarts: Option<usize>,

        /// Also probe FIO channels outside the FSIO class
        #[arg(long)]
        probe_fio: bool,

        /// Stdout format when no output path is given
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,

        /// Record CSV path; the summary goes to `<stem>.summary.json` next to it
        #[arg(short, long)]
        output: Option<PathBuf>,
    },

    /// Generate a random state or channel
    Random {
        #[arg(value_enum)]
        kind: RandomKind,

        #[arg(long)]
        dim: usize,

        /// Rank of a mixed state (defaults to the dimension)
        #[arg(long)]
        rank: Option<usize>,

        /// Number of Kraus operators of an FSIO channel
        #[arg(long, default_value_t = 2)]
        n_kraus: usize,

        #[command(flatten)]
        seed: SeedArg,

        #[command(flatten)]
        output: OutputArg,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Measure {
            input,
            which,
            format,
            output,
        } => commands::measure(&input, which, format, &output),
        Command::Roof {
            input,
            roof,
            seed,
            output,
        } => commands::roof(&input, &roof, seed.seed, &output),
        Command::Classify {
            kraus,
            zero_tol,
            output,
        } => commands::classify(&kraus, zero_tol, &output),
        Command::Apply {
            input,
            kraus,
            output,
        } => commands::apply(&input, &kraus, &output),
        Command::Verify {
            config,
            dims,
            trials,
            seed,
            tol,
            with_roof,
            restarts,
            probe_fio,
            format,
            output,
        } => commands::verify(commands::VerifyArgs {
            config,
            dims,
            trials,
            seed,
            tol,
            with_roof,
            restarts,
            probe_fio,
            format,
            output,
        }),
        Command::Random {
            kind,
            dim,
            rank,
            n_kraus,
            seed,
            output,
        } => commands::random(kind, dim, rank, n_kraus, seed.seed, &output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(msg) = e.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
