//! Classification of short networked texts by joint content and
//! network-structure learning.
//!
//! Tweets arrive as edges of a user-interaction graph. The pipeline turns
//! that graph into a tweet-tweet graph (one node per tweet, linked when two
//! interactions touch a common user), builds the random-walk Laplacian over
//! it, extracts sparse content features, and fits a linear classifier that
//! jointly minimizes a least-squares loss, ℓ1 and grouped ℓ2,1 penalties and
//! a graph-smoothness penalty. Connected tweets tend to share labels, so the
//! graph term pulls the predictions of linked tweets together.
//!
//! The pieces compose:
//!
//! ```
//! use nsi::graph::{line_graph, UserGraph};
//! use nsi::laplacian::laplacian;
//! use nsi::walk::{stationary_distribution, transition_matrix};
//!
//! let mut g = UserGraph::new();
//! g.add_edge("ana", "bo", "t1", 1.0)?;
//! g.add_edge("bo", "cy", "t2", 1.0)?;
//!
//! let tweets = line_graph(&g)?;
//! let p = transition_matrix(&tweets, 1.0)?;
//! let pi = stationary_distribution(&p, 1e-12, 10_000)?;
//! let lap = laplacian(&p, &pi)?;
//! assert_eq!(lap.len(), 2);
//! # Ok::<(), nsi::Error>(())
//! ```
//!
//! The `book/` directory of the repository walks through every stage; its
//! code snippets compile and run as doc-tests of this crate.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod io;
pub mod laplacian;
pub mod linalg;
pub mod solver;
pub mod sparse;
pub mod synth;
pub mod walk;

pub use dataset::Dataset;
pub use error::{Error, ErrorClass, Result};
pub use eval::{
    f1_score, metrics, run_ablation, stratified_split, AblationConfig, AblationData,
    AblationMode, ConfusionCounts, MetricsReport,
};
pub use features::{
    assign_groups, build_matrix, tokenize, ColumnNorm, ExtractorConfig, FeatureGroups,
    FeatureMatrix, TweetRecord, Vocabulary,
};
pub use graph::{line_graph, TweetGraph, UserGraph};
pub use laplacian::{laplacian, smoothness, GraphLaplacian};
pub use solver::{
    fit, fit_with_graph, l1_sparsify, objective, predict, predict_scores, Class, FitReport,
    Hyperparams, LabelMatrix,
};
pub use synth::{generate, SynthConfig, SynthData};
pub use walk::{
    stationary_distribution, transition_from_adjacency, transition_matrix,
    StationaryDistribution, TransitionMatrix,
};
