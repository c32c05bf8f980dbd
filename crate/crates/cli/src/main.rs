//! `local-ec`: generate instances, run the pipelines, check their outputs, and emit
//! metrics tables. Exit status 1 means a verifier rejected something, 2 a bad
//! configuration or unreadable input.

mod commands;
mod table;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use table::Format;

#[derive(Parser, Debug)]
#[command(name = "local-ec", version, about = "LOCAL-model edge coloring, tree LLL and lower-bound experiments")]
pub struct Cli {
    /// Master seed; trial `t` derives its own seed from `(seed, t)`.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub trials: usize,
    /// Directory for artifacts and the metrics file. Created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated graph as JSON.
    Gen(GenArgs),
    /// Edge-color a graph and check the coloring.
    Color(ColorArgs),
    /// Network decomposition of a tree power.
    Decompose(DecomposeArgs),
    /// Tree-structured Lovász Local Lemma instances.
    #[command(subcommand)]
    Lll(LllCommand),
    /// Bernoulli infection followed by the stable-set contagion.
    Contagion(ContagionArgs),
    /// Sinkless orientation from edge colorings, and the zero-round failure floor.
    #[command(subcommand)]
    Sinkless(SinklessCommand),
    /// The layered recoloring gadget.
    #[command(subcommand)]
    Vizing(VizingCommand),
    /// Per-trial wall time, rounds and retries on one fixed instance.
    Bench(BenchArgs),
    /// Check artifacts written by other subcommands.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Configuration-model Δ-regular graph.
    Regular,
    /// Δ-regular bipartite graph with sides labeled 0 and 1.
    Bipartite,
    /// Uniform random recursive tree.
    Tree,
    /// Random recursive tree with maximum degree Δ.
    BoundedTree,
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Graph JSON; overrides the generator.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long = "gen", value_enum)]
    pub generator: Option<GenKind>,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub delta: usize,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorAlgo {
    /// Two-phase nibble, `(1+ε)Δ` colors.
    Nibble,
    /// Sequential greedy, `2Δ−1` colors.
    Greedy,
    /// Linial reduction on the line graph.
    Linial,
    /// Δ colors on a tree.
    Tree,
    /// Δ+1 colors on a tree rooted at vertex 0.
    Oriented,
}

#[derive(Args, Debug)]
pub struct ColorArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum, default_value = "nibble")]
    pub algo: ColorAlgo,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// One-shot retries allowed per nibble iteration.
    #[arg(long, default_value_t = 50)]
    pub max_retries: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecompMode {
    TwoPart,
    Mixed,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum, default_value = "two-part")]
    pub mode: DecompMode,
    /// Power of the tree to decompose.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Marked-degree parameter of the mixed decomposition; defaults to the smallest legal value.
    #[arg(long)]
    pub lambda: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum LllCommand {
    /// Write an "all coins in the ball equal" instance on a random tree.
    Gen(LllGenArgs),
    /// Solve an instance and check the assignment.
    Solve(LllSolveArgs),
}

#[derive(Args, Debug)]
pub struct LllGenArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Maximum tree degree.
    #[arg(long, default_value_t = 5)]
    pub delta: usize,
    /// Dependency radius; events look at coins within `r/2`.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LllMethod {
    /// Shatter, then solve components deterministically.
    Shatter,
    /// Sequential Moser–Tardos.
    MoserTardos,
    /// Conditional expectations over a decomposition of the whole tree power.
    Deterministic,
}

#[derive(Args, Debug)]
pub struct LllSolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "shatter")]
    pub method: LllMethod,
    /// Pipeline restarts for the shatter method.
    #[arg(long, default_value_t = 3)]
    pub max_retries: usize,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_resamples: u64,
}

#[derive(Args, Debug)]
pub struct ContagionArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Maximum tree degree.
    #[arg(long, default_value_t = 8)]
    pub delta: usize,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    #[arg(long, default_value_t = 4)]
    pub mu: usize,
    /// Contagion depth; defaults to the frozen formula in `n` and `μ`.
    #[arg(long)]
    pub tau: Option<usize>,
    /// Per-vertex infection probability.
    #[arg(long, default_value_t = 1e-3)]
    pub q0: f64,
}

#[derive(Subcommand, Debug)]
pub enum SinklessCommand {
    /// Run the edge-coloring to sinkless-orientation reduction on bipartite graphs.
    Reduce(SinklessArgs),
    /// Minimum over a grid of zero-round algorithms of the worst-label sink probability.
    Floor(FloorArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Colorer {
    /// Proper (2Δ−2)-coloring.
    Perfect,
    /// Leaves every edge uncolored.
    Bottom,
}

#[derive(Args, Debug)]
pub struct SinklessArgs {
    /// Vertices per side.
    #[arg(long, default_value_t = 500)]
    pub half: usize,
    #[arg(long, default_value_t = 3)]
    pub delta: usize,
    #[arg(long, value_enum, default_value = "perfect")]
    pub colorer: Colorer,
    /// Rounds charged to the colorer.
    #[arg(long, default_value_t = 2)]
    pub rounds: usize,
}

#[derive(Args, Debug)]
pub struct FloorArgs {
    #[arg(long, default_value_t = 3)]
    pub delta: usize,
    /// Grid resolution: `q_i ∈ {0, 1/steps, …, 1}`.
    #[arg(long, default_value_t = 20)]
    pub steps: u64,
}

#[derive(Subcommand, Debug)]
pub enum VizingCommand {
    /// Build the gadget and run its structural checks.
    Build(GadgetArgs),
    /// Search for a contradiction when the top layers are frozen.
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GadgetArgs {
    #[arg(long, default_value_t = 5)]
    pub delta: usize,
    #[arg(long, default_value_t = 1)]
    pub c: usize,
    #[arg(long, default_value_t = 8)]
    pub ell: usize,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub gadget: GadgetArgs,
    /// Number of top layers held fixed.
    #[arg(long, default_value_t = local_ec::constants::FROZEN_TOP_DEFAULT)]
    pub frozen_top: usize,
    /// Drop every layer above this one before checking.
    #[arg(long)]
    pub truncate: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pipeline {
    Nibble,
    TreeColor,
    Oriented,
    Decompose,
    Lll,
    Sinkless,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub pipeline: Pipeline,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub delta: usize,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Graph JSON with colors: every edge colored, no clash.
    Coloring {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        max_colors: Option<u32>,
    },
    /// Decomposition JSON against its tree.
    Decomposition {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        decomposition: PathBuf,
        /// Also require every diameter part to have the same components in `T` and `T^k`.
        #[arg(long)]
        separated: bool,
    },
    /// Gadget JSON structure.
    Gadget {
        #[arg(long)]
        gadget: PathBuf,
    },
    /// Replay a certificate on its gadget.
    Certificate {
        #[arg(long)]
        gadget: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// No event of the instance occurs under the assignment.
    Assignment {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
    },
}

fn init_pool() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("LOCAL_EC_THREADS") {
        let threads: usize = v.parse().map_err(|_| anyhow::anyhow!("LOCAL_EC_THREADS must be a positive integer, got {v:?}"))?;
        anyhow::ensure!(threads > 0, "LOCAL_EC_THREADS must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_pool().and_then(|_| commands::run(&cli));
    match result {
        Ok(violations) if violations.is_empty() => ExitCode::SUCCESS,
        Ok(violations) => {
            const SHOWN: usize = 20;
            for v in violations.iter().take(SHOWN) {
                eprintln!("violation: {v}");
            }
            if violations.len() > SHOWN {
                eprintln!("... and {} more violations", violations.len() - SHOWN);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
