mod bench;
mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "degsample", version, about = "Uniform join and subgraph sampling under degree constraints")]
pub struct Cli {
    /// Seed for every random choice; identical seeds and inputs give identical output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Race the sampler against the enumerator on two threads instead of interleaving.
    #[arg(long, global = true)]
    pub parallel: bool,

    /// Sampler attempts and enumerator steps per interleaving round.
    #[arg(long, global = true, default_value_t = 1024)]
    pub work_unit: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sample,
    Estimate,
    Permute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKindArg {
    CliqueUnion,
    Tripartite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Bounds,
    Uniformity,
    Tightness,
}

#[derive(Args, Debug)]
pub struct PatternArgs {
    /// Pattern edge list (`u v` per line).
    #[arg(long)]
    pub pattern: PathBuf,
    /// Treat the edge lists as directed.
    #[arg(long, conflicts_with = "undirected")]
    pub directed: bool,
    /// Treat the edge lists as undirected (the default).
    #[arg(long)]
    pub undirected: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Output-size bounds of a join spec, or of a pattern for given m and lambda.
    Bound {
        #[arg(long, conflicts_with = "pattern", required_unless_present = "pattern")]
        spec: Option<PathBuf>,
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long, requires = "pattern")]
        directed: bool,
        #[arg(long, conflicts_with = "directed")]
        undirected: bool,
        #[arg(long, required_unless_present = "spec")]
        m: Option<u64>,
        #[arg(long, required_unless_present = "spec")]
        lambda: Option<u64>,
    },
    /// Sample, estimate or permute the result of a join spec.
    SampleJoin {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Sample)]
        mode: Mode,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
        /// Print fragment index statistics to stderr.
        #[arg(long)]
        dump_index_stats: bool,
    },
    /// Estimate the output size of a join spec.
    Estimate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
        #[arg(long)]
        dump_index_stats: bool,
    },
    /// Sample pattern occurrences from a data graph.
    SampleSubgraph {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        pattern: PatternArgs,
        /// Degree cap; defaults to the graph's maximum (out-)degree.
        #[arg(long)]
        lambda: Option<u64>,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// List every join result, or every pattern occurrence.
    Enumerate {
        #[arg(long, conflicts_with_all = ["graph", "pattern"], required_unless_present = "graph")]
        spec: Option<PathBuf>,
        #[arg(long, requires = "pattern")]
        graph: Option<PathBuf>,
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long)]
        directed: bool,
        #[arg(long)]
        lambda: Option<u64>,
    },
    /// Fractional edge-cover decomposition of an undirected pattern.
    Decompose {
        #[arg(long)]
        pattern: PathBuf,
    },
    /// Write a worst-case data graph as an edge list.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKindArg,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        lambda: u64,
        #[arg(long, default_value_t = 3)]
        k: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a quick self-check suite against brute-force oracles.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Attempts per success of degree-constrained vs cardinality-only sampling
    /// on the clique-union family with the triangle pattern.
    Bench {
        /// Edge budgets, as powers of two.
        #[arg(long, value_delimiter = ',', default_values_t = [10u32, 12, 14])]
        log_m: Vec<u32>,
        #[arg(long, default_value_t = 8)]
        lambda: u64,
        #[arg(long, default_value_t = 2000)]
        successes: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("degsample: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
