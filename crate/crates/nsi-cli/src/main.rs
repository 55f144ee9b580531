//! Command-line pipeline: convert interaction edges to a tweet graph, build
//! the Laplacian, train, predict, evaluate, generate synthetic data and run
//! ablations. Every command is a pure function of its inputs and flags and
//! leaves a manifest beside its outputs.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nsi::ErrorClass;

#[derive(Parser)]
#[command(name = "nsi", version, about = "Networked short-text classification pipeline")]
struct Cli {
    /// Seed for commands that draw random numbers (synth, ablate).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    /// Directory for run manifests; defaults to each output's directory.
    #[arg(long, global = true)]
    manifest_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Sparsity strength (final soft threshold).
    #[arg(long, default_value_t = 0.01)]
    lambda1: f64,

    /// Group-sparsity strength.
    #[arg(long, default_value_t = 0.5)]
    lambda2: f64,

    /// Graph-smoothness strength.
    #[arg(long = "lambda-s", default_value_t = 0.4)]
    lambda_s: f64,

    /// Reweighting floor.
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,

    /// Relative objective-change stopping tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

#[derive(Args, Clone)]
struct WalkArgs {
    /// Teleportation damping of the random walk, in (0, 1].
    #[arg(long, default_value_t = 0.85)]
    damping: f64,

    /// Fixed-point tolerance for the stationary distribution.
    #[arg(long, default_value_t = 1e-12)]
    walk_tol: f64,

    #[arg(long, default_value_t = 100_000)]
    walk_max_iter: usize,
}

#[derive(Args, Clone)]
struct FeatureArgs {
    /// Word n-gram order: 1 (unigrams) or 2 (unigrams + bigrams).
    #[arg(long, default_value_t = 2)]
    ngram_order: usize,

    /// Append part-of-speech labels to word features (needs annotations).
    #[arg(long)]
    pos_colored: bool,

    /// Drop word n-grams with fewer total occurrences than this.
    #[arg(long, default_value_t = 2)]
    min_count: usize,

    /// Skip unit-ℓ2 column normalization.
    #[arg(long)]
    no_column_norm: bool,

    /// Word-list file for the quantifier counts.
    #[arg(long)]
    quantifiers: Option<PathBuf>,

    /// Sidecar annotation file (`tweet_id TAB token_index TAB pos TAB entity`).
    #[arg(long)]
    annotations: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Convert an interaction edge list into the tweet-tweet graph.
    Convert {
        /// Edge list: `src TAB dst TAB tweet_id [TAB weight]`.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the random-walk Laplacian of a tweet graph.
    Laplacian {
        /// Tweet-graph file produced by `convert`.
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the classifier on labeled tweets.
    Train {
        /// Records: `tweet_id TAB label TAB text` with label 0, 1 or ?.
        #[arg(long)]
        tweets: PathBuf,
        /// Interaction edge list covering the same tweets.
        #[arg(long)]
        edges: PathBuf,
        /// Span the graph penalty over unlabeled tweets too.
        #[arg(long)]
        transductive: bool,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Model output path; a fit report lands next to it.
        #[arg(long)]
        model: PathBuf,
    },
    /// Score tweets with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        tweets: PathBuf,
        /// Sidecar annotation file.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare predictions (or a model) against labeled records.
    Evaluate {
        /// Prediction file from `predict`; alternative to --model.
        #[arg(long, conflicts_with = "model")]
        predictions: Option<PathBuf>,
        /// Model file; predictions are computed on the fly.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic data set with planted community structure.
    Synth {
        #[arg(long, default_value_t = 400)]
        n_users: usize,
        #[arg(long, default_value_t = 2000)]
        n_tweets: usize,
        #[arg(long, default_value_t = 2)]
        n_communities: usize,
        #[arg(long, default_value_t = 0.05)]
        p_intra: f64,
        #[arg(long, default_value_t = 0.005)]
        p_inter: f64,
        #[arg(long, default_value_t = 0.099)]
        positive_rate: f64,
        #[arg(long, default_value_t = 0.3)]
        content_signal: f64,
        #[arg(long, default_value_t = 400)]
        vocab_size: usize,
        /// Output directory; receives edges.tsv, tweets.tsv and the manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the combined / content-only / network-only comparison.
    Ablate {
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        train_frac: f64,
        /// With 2 or more folds, metrics are averaged over a stratified
        /// k-fold instead of a single split.
        #[arg(long, default_value_t = 1)]
        folds: usize,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let class = err
                .downcast_ref::<nsi::Error>()
                .map(nsi::Error::class)
                .unwrap_or(ErrorClass::Io);
            ExitCode::from(match class {
                ErrorClass::Io => 2,
                ErrorClass::Validation => 3,
                ErrorClass::Numerical => 4,
            })
        }
    }
}
