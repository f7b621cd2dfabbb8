use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exact construction and analysis of rank-one towers.
#[derive(Parser, Debug)]
#[command(name = "rankone", version, about)]
struct Cli {
    /// Evaluate scans on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// Reserved; every operation is deterministic.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Materialize columns up to a stage and summarize them.
    Build {
        family: PathBuf,
        #[arg(long)]
        stage: u32,
    },
    /// Synthesize a four-cut family for target directions.
    Synthesize(SynthesizeArgs),
    /// Check class membership and re-check an embedded trace.
    Verify {
        family: PathBuf,
        /// Last stage to check; defaults to the trace length or 8.
        #[arg(long)]
        stages: Option<u32>,
    },
    /// Decide the regime of T^p x T^q; the exit code encodes it.
    Classify {
        family: PathBuf,
        /// `p/q`; a leading `-` asks about T^-p x T^q.
        #[arg(long, allow_hyphen_values = true)]
        ratio: String,
        /// Last stage to inspect.
        #[arg(long, default_value_t = 12)]
        horizon: u32,
    },
    /// Product correlations over a lag range, as CSV.
    Correlate(CorrelateArgs),
    /// Return times of T^p x T^q on A x A, as CSV.
    Lambda(LambdaArgs),
    /// Build and verify the non-ergodicity witness of a V_L family.
    Witness(WitnessArgs),
    /// Series verdicts and ergodic index of a V_L family.
    Series { family: PathBuf },
    /// Exact pairwise independence along the return times t(i).
    Independence(IndependenceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    ErgodicSet,
    ThreeWay,
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    /// Target ratios; in three-way mode the ergodic set R1.
    #[arg(long = "R", value_name = "LIST", default_value = "")]
    r: String,
    /// Conservative targets R2 (three-way mode), a superset of R1.
    #[arg(long = "R2", value_name = "LIST")]
    r2: Option<String>,
    /// Prefix of the complement enumeration.
    #[arg(long = "S", value_name = "LIST", default_value = "")]
    s: String,
    #[arg(long, value_enum, default_value_t = Mode::ErgodicSet)]
    mode: Mode,
    #[arg(long, default_value_t = 8)]
    stages: u32,
    /// Where to write the family file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    family: PathBuf,
    /// Source level set `stage:i,j,lo..hi`; repeat for product coordinates.
    #[arg(long = "set", required = true)]
    sets: Vec<String>,
    /// Target level sets; defaults to the sources.
    #[arg(long = "target")]
    targets: Vec<String>,
    /// Powers per coordinate, comma-separated; defaults to all 1.
    #[arg(long, allow_hyphen_values = true)]
    powers: Option<String>,
    /// Inclusive lag range `a..b`.
    #[arg(long, allow_hyphen_values = true)]
    range: String,
    /// Skip rows whose value is zero.
    #[arg(long)]
    nonzero: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LambdaArgs {
    family: PathBuf,
    #[arg(long)]
    ratio: String,
    #[arg(long = "set")]
    set: String,
    #[arg(long)]
    horizon: u64,
    /// Use T A x A as the source.
    #[arg(long)]
    shifted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WitnessArgs {
    family: PathBuf,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    n: u32,
    /// Last stage whose right-hand copies are removed.
    #[arg(long = "M")]
    m: u32,
    /// Largest |i| scanned; defaults to min(h_{n+2}, h_{M+1}).
    #[arg(long)]
    horizon: Option<i128>,
}

#[derive(Args, Debug)]
struct IndependenceArgs {
    family: PathBuf,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    j: u64,
    #[arg(long, default_value_t = 3)]
    count: u64,
    /// Level indices of I and J in C_n.
    #[arg(long = "I")]
    i_level: u128,
    #[arg(long = "J")]
    j_level: u128,
}

/// Parse failures exit 2, other failures 1.
fn failure_code(err: &anyhow::Error) -> u8 {
    let parse = err.chain().any(|e| {
        e.downcast_ref::<rankone::Error>().is_some_and(|e| e.is_parse())
            || e.downcast_ref::<rankone::ParseError>().is_some()
    });
    if parse {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(failure_code(&err))
        }
    }
}
