//! `elx`: generate Hetero-BA-Shapes data, train the heterogeneous GNN and
//! explain it with EL class expressions.
//!
//! Every command writes its data to `--out`; progress goes to stderr.

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use elx::scoring::{Aggregation, ScorerKind};

#[derive(Parser, Debug)]
#[command(name = "elx", version, about = "Global class-expression explanations for heterogeneous GNNs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a Hetero-BA-Shapes dataset.
    GenDataset(GenDatasetArgs),
    /// Train the GNN on a dataset's train split.
    Train(TrainArgs),
    /// Beam-search class expressions that explain a trained model.
    Explain(ExplainArgs),
    /// Evaluate one class expression.
    Eval(EvalArgs),
    /// Edge-type ablation on a synthesized graph.
    Ablate(AblateArgs),
}

#[derive(Args, Debug)]
pub struct GenDatasetArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Nodes in the Barabási–Albert base graph.
    #[arg(long, default_value_t = 10_000)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1000)]
    pub motifs: usize,
    /// Edges each new base node attaches with.
    #[arg(long, default_value_t = 3)]
    pub m_attach: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    /// Model output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch loss and accuracy CSV.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// JSON with the selected epoch and per-split accuracy.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ScoreArgs {
    /// Length penalty weight.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Graphs synthesized per expression.
    #[arg(long, default_value_t = 100)]
    pub graphs_per_ce: usize,
    /// `mean` or `max`.
    #[arg(long, default_value = "max")]
    pub aggr: Aggregation,
    /// Label whose logit is explained.
    #[arg(long, default_value_t = 1)]
    pub label: usize,
    #[arg(long, default_value = "B")]
    pub root_class: String,
}

#[derive(Args, Debug)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `gnn` or `fidelity`.
    #[arg(long, default_value = "gnn")]
    pub scorer: ScorerKind,
    /// Dataset the fidelity scorer evaluates on.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Dataset for reporting test fidelity of emitted candidates.
    #[arg(long)]
    pub test_dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub beam_width: usize,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[command(flatten)]
    pub score: ScoreArgs,
    /// Number of top candidates written.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    /// Results JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Ranked summary table (CE, fidelity, EA, GNN output).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Class expression, e.g. `B and (to some A)`.
    #[arg(long)]
    pub ce: String,
    /// Model for gamma and fidelity.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Dataset for fidelity (requires --model).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub score: ScoreArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Results file whose evidence graph is ablated.
    #[arg(long)]
    pub results: PathBuf,
    /// Candidate position in the results file, 0 for the best.
    #[arg(long, default_value_t = 0)]
    pub rank: usize,
    #[arg(long, default_value_t = 1)]
    pub label: usize,
    /// CSV output.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenDataset(a) => commands::gen_dataset(&a),
        Command::Train(a) => commands::train(&a),
        Command::Explain(a) => commands::explain(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Ablate(a) => commands::ablate(&a),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
