pub mod commands;
pub mod plot;
pub mod record;
pub mod text;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::run;

#[derive(Debug, Parser)]
#[command(name = "ocnsim", version, about = "Strong and weak simulation between one-counter nets")]
pub struct Cli {
    /// Print a JSON result record instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Largest Spoiler counter range explored by the threshold engine.
    #[arg(long, global = true, default_value_t = 512)]
    pub budget: u64,
    /// Seed for randomized corpora.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Query {
    /// Spoiler net file.
    pub lhs: String,
    /// Spoiler configuration `state:counter`.
    pub lhs_cfg: String,
    /// Duplicator net file.
    pub rhs: String,
    /// Duplicator configuration `state:counter`.
    pub rhs_cfg: String,
}

#[derive(Debug, Args)]
pub struct NetPair {
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Game {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Opt,
    Pess,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide strong simulation between two configurations.
    Strong(Query),
    /// Decide weak simulation between two configurations.
    Weak {
        #[command(flatten)]
        query: Query,
        /// Write every approximant net and the sufficient-value history here.
        #[arg(long)]
        emit_approximants: Option<String>,
    },
    /// Belt boundaries of state pairs.
    Belts {
        #[command(flatten)]
        nets: NetPair,
        #[arg(long)]
        pair: Option<String>,
    },
    /// Minimal sufficient values of state pairs.
    Suff {
        #[command(flatten)]
        nets: NetPair,
        #[arg(long)]
        pair: Option<String>,
    },
    /// Solve one slope game.
    Slope {
        #[command(flatten)]
        nets: NetPair,
        #[arg(long)]
        pair: String,
        /// Direction `x/y`.
        #[arg(long)]
        slope: String,
    },
    /// Bounded-round game on an explicit grid.
    Oracle {
        game: Game,
        #[command(flatten)]
        query: Query,
        #[arg(long, default_value_t = 25)]
        rounds: u32,
        #[arg(long, default_value_t = 60)]
        grid: u64,
        #[arg(long, value_enum, default_value_t = Mode::Pess)]
        mode: Mode,
    },
    /// Write the guarded ω-net and the expanded nets of the weak reduction.
    ReduceWeak {
        #[command(flatten)]
        nets: NetPair,
        #[arg(short, long)]
        out: String,
    },
    /// Print or write the normal form of a net pair.
    Normalize {
        #[command(flatten)]
        nets: NetPair,
        #[arg(short, long)]
        out: Option<String>,
    },
    /// Render the strong simulation verdicts of a pair as a PGM image.
    Plot {
        #[command(flatten)]
        nets: NetPair,
        #[arg(long)]
        pair: String,
        #[arg(long)]
        max: u64,
        #[arg(short, long)]
        out: String,
        /// Overlay belt boundaries at gray level 64.
        #[arg(long)]
        belts: bool,
    },
    /// Cross-check the engines against the oracle on a seeded random corpus.
    Selftest {
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}
