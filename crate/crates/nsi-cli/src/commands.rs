use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use nsi::dataset::Dataset;
use nsi::eval::{
    format_metrics_rows, metrics, run_ablation, AblationConfig, AblationData, ConfusionCounts,
};
use nsi::features::{
    assign_groups, build_matrix, ColumnNorm, ExtractorConfig, FeatureFamilies, NgramOrder,
};
use nsi::graph::TweetGraph;
use nsi::io;
use nsi::laplacian::{laplacian, GraphLaplacian};
use nsi::solver::{fit, fit_with_graph, predict_scores, Class, FitReport, Hyperparams, LabelMatrix};
use nsi::synth::{generate, SynthConfig};
use nsi::walk::{stationary_distribution, transition_matrix};
use nsi::Error;

use crate::manifest::{manifest_dir, ManifestBuilder};
use crate::{Cli, Command, FeatureArgs, SolverArgs, WalkArgs};

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Convert { edges, out } => cmd_convert(&cli, edges, out),
        Command::Laplacian { graph, walk, out } => cmd_laplacian(&cli, graph, walk, out),
        Command::Train {
            tweets,
            edges,
            transductive,
            features,
            walk,
            solver,
            model,
        } => cmd_train(&cli, tweets, edges, *transductive, features, walk, solver, model),
        Command::Predict {
            model,
            tweets,
            annotations,
            out,
        } => cmd_predict(&cli, model, tweets, annotations.as_deref(), out),
        Command::Evaluate {
            predictions,
            model,
            tweets,
            annotations,
            out,
        } => cmd_evaluate(
            &cli,
            predictions.as_deref(),
            model.as_deref(),
            tweets,
            annotations.as_deref(),
            out,
        ),
        Command::Synth {
            n_users,
            n_tweets,
            n_communities,
            p_intra,
            p_inter,
            positive_rate,
            content_signal,
            vocab_size,
            out,
        } => {
            let config = SynthConfig {
                n_users: *n_users,
                n_tweets: *n_tweets,
                n_communities: *n_communities,
                p_intra: *p_intra,
                p_inter: *p_inter,
                positive_rate: *positive_rate,
                content_signal: *content_signal,
                vocab_size: *vocab_size,
                seed: cli.seed,
            };
            cmd_synth(&cli, &config, out)
        }
        Command::Ablate {
            tweets,
            edges,
            train_frac,
            folds,
            features,
            walk,
            solver,
            out,
        } => cmd_ablate(&cli, tweets, edges, *train_frac, *folds, features, walk, solver, out),
    }
}

fn say(cli: &Cli, message: impl AsRef<str>) {
    if !cli.quiet {
        println!("{}", message.as_ref());
    }
}

fn base_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn hyperparams(args: &SolverArgs) -> Hyperparams {
    Hyperparams {
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        lambda_s: args.lambda_s,
        epsilon: args.epsilon,
        tol: args.tol,
        max_iter: args.max_iter,
    }
}

fn extractor_config(args: &FeatureArgs) -> Result<ExtractorConfig> {
    let ngram_order = match args.ngram_order {
        1 => NgramOrder::Unigram,
        2 => NgramOrder::UnigramBigram,
        other => {
            return Err(Error::DegenerateConfig(format!(
                "ngram order must be 1 or 2, got {other}"
            ))
            .into())
        }
    };
    let quantifier_lexicon = match &args.quantifiers {
        Some(path) => io::read_word_list(path)?,
        None => Default::default(),
    };
    Ok(ExtractorConfig {
        ngram_order,
        pos_colored: args.pos_colored,
        min_count: args.min_count,
        families: FeatureFamilies::default(),
        column_norm: if args.no_column_norm {
            ColumnNorm::None
        } else {
            ColumnNorm::UnitL2
        },
        quantifier_lexicon,
    })
}

fn solver_flags(builder: &mut ManifestBuilder, args: &SolverArgs) {
    builder
        .flag("lambda1", io::fmt_g17(args.lambda1))
        .flag("lambda2", io::fmt_g17(args.lambda2))
        .flag("lambda_s", io::fmt_g17(args.lambda_s))
        .flag("epsilon", io::fmt_g17(args.epsilon))
        .flag("tol", io::fmt_g17(args.tol))
        .flag("max_iter", args.max_iter);
}

fn walk_flags(builder: &mut ManifestBuilder, args: &WalkArgs) {
    builder
        .flag("damping", io::fmt_g17(args.damping))
        .flag("walk_tol", io::fmt_g17(args.walk_tol))
        .flag("walk_max_iter", args.walk_max_iter);
}

fn feature_flags(builder: &mut ManifestBuilder, args: &FeatureArgs) {
    builder
        .flag("ngram_order", args.ngram_order)
        .flag("pos_colored", args.pos_colored)
        .flag("min_count", args.min_count)
        .flag(
            "column_norm",
            if args.no_column_norm { "none" } else { "unit-l2" },
        );
}

/// Builds the Laplacian, refusing damping 1 on graphs where the walk has no
/// unique stationary distribution.
fn build_laplacian(graph: &TweetGraph, walk: &WalkArgs) -> Result<GraphLaplacian> {
    if walk.damping >= 1.0 && !graph.is_connected() {
        return Err(Error::DisconnectedGraph {
            components: graph.component_count(),
        }
        .into());
    }
    let p = transition_matrix(graph, walk.damping)?;
    let pi = stationary_distribution(&p, walk.walk_tol, walk.walk_max_iter)?;
    Ok(laplacian(&p, &pi)?)
}

fn cmd_convert(cli: &Cli, edges: &Path, out: &Path) -> Result<()> {
    let user_graph = io::read_edge_list(edges)?;
    let tweet_graph = nsi::graph::line_graph(&user_graph)?;
    io::write_tweet_graph(&tweet_graph, out)?;
    say(
        cli,
        format!(
            "converted {} interactions into a {}-tweet graph with {} links",
            user_graph.edge_count(),
            tweet_graph.len(),
            tweet_graph.edge_count()
        ),
    );
    let mut manifest = ManifestBuilder::new("convert");
    manifest.flag("out", base_name(out));
    manifest.input("edges", edges)?;
    manifest.write(&manifest_dir(&cli.manifest_dir, out))?;
    Ok(())
}

fn cmd_laplacian(cli: &Cli, graph: &Path, walk: &WalkArgs, out: &Path) -> Result<()> {
    let tweet_graph = io::read_tweet_graph(graph)?;
    let lap = build_laplacian(&tweet_graph, walk)?;
    io::write_coordinate(lap.matrix(), &[], out)?;
    say(cli, format!("wrote {}x{} laplacian", lap.len(), lap.len()));
    let mut manifest = ManifestBuilder::new("laplacian");
    walk_flags(&mut manifest, walk);
    manifest.flag("out", base_name(out));
    manifest.input("graph", graph)?;
    manifest.write(&manifest_dir(&cli.manifest_dir, out))?;
    Ok(())
}

fn format_fit_report(report: &FitReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("iterations\t{}\n", report.iterations));
    out.push_str(&format!("converged\t{}\n", report.converged));
    out.push_str(&format!(
        "final_sparsity\t{}\n",
        io::fmt_g17(report.final_sparsity)
    ));
    for (i, v) in report.objective_trace.iter().enumerate() {
        out.push_str(&format!("objective\t{}\t{}\n", i + 1, io::fmt_g17(*v)));
    }
    for (i, v) in report.smooth_trace.iter().enumerate() {
        out.push_str(&format!("smooth\t{}\t{}\n", i + 1, io::fmt_g17(*v)));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    cli: &Cli,
    tweets: &Path,
    edges: &Path,
    transductive: bool,
    features: &FeatureArgs,
    walk: &WalkArgs,
    solver: &SolverArgs,
    model_out: &Path,
) -> Result<()> {
    let (mut records, labels) = io::read_records(tweets)?;
    if let Some(path) = &features.annotations {
        io::read_annotations(&mut records, path)?;
    }
    let user_graph = io::read_edge_list(edges)?;
    let dataset = Dataset::assemble(&user_graph, records, labels)?;
    let labeled = dataset.labeled_indices();
    if labeled.is_empty() {
        return Err(Error::EmptyInput("no labeled tweets to train on".into()).into());
    }

    let extractor = extractor_config(features)?;
    let train_records: Vec<_> = labeled.iter().map(|&i| dataset.records[i].clone()).collect();
    let classes: Vec<Class> = labeled.iter().map(|&i| dataset.labels[i].unwrap()).collect();
    let (x_train, vocab) = build_matrix(&train_records, None, &extractor)?;
    let groups = assign_groups(&vocab);
    let y = LabelMatrix::from_classes(&classes);
    let hyper = hyperparams(solver);

    let (w, report) = if hyper.lambda_s > 0.0 {
        if transductive {
            let lap = build_laplacian(&dataset.graph, walk)?;
            let (x_all, _) = build_matrix(&dataset.records, Some(&vocab), &extractor)?;
            fit_with_graph(&x_train, &y, Some((&x_all, &lap)), &groups, &hyper)?
        } else {
            let sub = dataset.graph.subgraph(&labeled);
            let lap = build_laplacian(&sub, walk)?;
            fit(&x_train, &y, Some(&lap), &groups, &hyper)?
        }
    } else {
        fit(&x_train, &y, None, &groups, &hyper)?
    };

    let model = io::TrainedModel {
        w,
        vocab,
        groups,
        hyper,
        extractor,
        n_train: labeled.len(),
    };
    io::write_model(&model, model_out)?;
    let report_path = report_path_for(model_out);
    fs::write(&report_path, format_fit_report(&report))?;
    say(
        cli,
        format!(
            "trained on {} tweets, {} features; converged: {} in {} sweeps",
            labeled.len(),
            model.vocab.len(),
            report.converged,
            report.iterations
        ),
    );

    let mut manifest = ManifestBuilder::new("train");
    solver_flags(&mut manifest, solver);
    walk_flags(&mut manifest, walk);
    feature_flags(&mut manifest, features);
    manifest.flag("transductive", transductive);
    manifest.flag("model", base_name(model_out));
    manifest.input("tweets", tweets)?;
    manifest.input("edges", edges)?;
    if let Some(path) = &features.annotations {
        manifest.input("annotations", path)?;
    }
    if let Some(path) = &features.quantifiers {
        manifest.input("quantifiers", path)?;
    }
    manifest.write(&manifest_dir(&cli.manifest_dir, model_out))?;
    Ok(())
}

fn report_path_for(model_out: &Path) -> PathBuf {
    let mut name = model_out.as_os_str().to_os_string();
    name.push(".report");
    PathBuf::from(name)
}

fn cmd_predict(
    cli: &Cli,
    model_path: &Path,
    tweets: &Path,
    annotations: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let model = io::read_model(model_path)?;
    let (mut records, _labels) = io::read_records(tweets)?;
    if let Some(path) = annotations {
        io::read_annotations(&mut records, path)?;
    }
    let (x, _) = build_matrix(&records, Some(&model.vocab), &model.extractor)?;
    let rows: Vec<(String, Class, f64, f64)> = (0..x.ncols())
        .map(|j| {
            let scores = predict_scores(&x, j, &model.w);
            let class = if scores[1] > scores[0] {
                Class::Positive
            } else {
                Class::Negative
            };
            (records[j].tweet_id.clone(), class, scores[0], scores[1])
        })
        .collect();
    io::write_predictions(&rows, out)?;
    say(cli, format!("scored {} tweets", rows.len()));

    let mut manifest = ManifestBuilder::new("predict");
    manifest.flag("out", base_name(out));
    manifest.input("model", model_path)?;
    manifest.input("tweets", tweets)?;
    if let Some(path) = annotations {
        manifest.input("annotations", path)?;
    }
    manifest.write(&manifest_dir(&cli.manifest_dir, out))?;
    Ok(())
}

fn cmd_evaluate(
    cli: &Cli,
    predictions: Option<&Path>,
    model_path: Option<&Path>,
    tweets: &Path,
    annotations: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let (mut records, labels) = io::read_records(tweets)?;
    if let Some(path) = annotations {
        io::read_annotations(&mut records, path)?;
    }

    let predicted: Vec<(String, Class)> = match (predictions, model_path) {
        (Some(path), None) => io::read_predictions(path)?
            .into_iter()
            .map(|(id, class, _, _)| (id, class))
            .collect(),
        (None, Some(path)) => {
            let model = io::read_model(path)?;
            let (x, _) = build_matrix(&records, Some(&model.vocab), &model.extractor)?;
            (0..x.ncols())
                .map(|j| {
                    let scores = predict_scores(&x, j, &model.w);
                    let class = if scores[1] > scores[0] {
                        Class::Positive
                    } else {
                        Class::Negative
                    };
                    (records[j].tweet_id.clone(), class)
                })
                .collect()
        }
        _ => bail!("evaluate needs exactly one of --predictions or --model"),
    };

    let by_id: std::collections::HashMap<&str, Class> = predicted
        .iter()
        .map(|(id, class)| (id.as_str(), *class))
        .collect();
    let mut truth = Vec::new();
    let mut guess = Vec::new();
    for (record, label) in records.iter().zip(&labels) {
        if let (Some(label), Some(&class)) = (label, by_id.get(record.tweet_id.as_str())) {
            truth.push(*label);
            guess.push(class);
        }
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput(
            "no labeled tweets matched the predictions".into(),
        )
        .into());
    }
    let report = metrics(&ConfusionCounts::from_labels(&truth, &guess));
    let table = format_metrics_rows(&[("overall".to_string(), report)]);
    fs::write(out, &table)?;
    say(cli, table.trim_end().to_string());

    let mut manifest = ManifestBuilder::new("evaluate");
    manifest.flag("out", base_name(out));
    manifest.input("tweets", tweets)?;
    if let Some(path) = predictions {
        manifest.input("predictions", path)?;
    }
    if let Some(path) = model_path {
        manifest.input("model", path)?;
    }
    manifest.write(&manifest_dir(&cli.manifest_dir, out))?;
    Ok(())
}

fn cmd_synth(cli: &Cli, config: &SynthConfig, out_dir: &Path) -> Result<()> {
    let data = generate(config)?;
    fs::create_dir_all(out_dir)?;
    let edges_path = out_dir.join("edges.tsv");
    let tweets_path = out_dir.join("tweets.tsv");
    io::write_edge_list(&data.user_graph, &edges_path)?;
    let labels: Vec<Option<Class>> = data.labels.iter().copied().map(Some).collect();
    io::write_records(&data.records, &labels, &tweets_path)?;
    say(
        cli,
        format!(
            "generated {} tweets ({} positive rate, {:.1} interactions per tweet)",
            data.stats.n_edges,
            io::fmt_g17(data.stats.positive_rate),
            data.stats.avg_interactions_per_tweet
        ),
    );

    let mut manifest = ManifestBuilder::new("synth");
    manifest
        .flag("n_users", config.n_users)
        .flag("n_tweets", config.n_tweets)
        .flag("n_communities", config.n_communities)
        .flag("p_intra", io::fmt_g17(config.p_intra))
        .flag("p_inter", io::fmt_g17(config.p_inter))
        .flag("positive_rate", io::fmt_g17(config.positive_rate))
        .flag("content_signal", io::fmt_g17(config.content_signal))
        .flag("vocab_size", config.vocab_size)
        .flag("seed", config.seed)
        .flag("stat.n_edges", data.stats.n_edges)
        .flag(
            "stat.positive_rate",
            io::fmt_g17(data.stats.positive_rate),
        )
        .flag(
            "stat.avg_interactions_per_tweet",
            io::fmt_g17(data.stats.avg_interactions_per_tweet),
        );
    manifest.write(&manifest_dir(&cli.manifest_dir, &tweets_path))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_ablate(
    cli: &Cli,
    tweets: &Path,
    edges: &Path,
    train_frac: f64,
    folds: usize,
    features: &FeatureArgs,
    walk: &WalkArgs,
    solver: &SolverArgs,
    out: &Path,
) -> Result<()> {
    let (mut records, labels) = io::read_records(tweets)?;
    if let Some(path) = &features.annotations {
        io::read_annotations(&mut records, path)?;
    }
    let user_graph = io::read_edge_list(edges)?;
    let dataset = Dataset::assemble(&user_graph, records, labels)?;
    let extractor = extractor_config(features)?;
    let data = AblationData::from_dataset(&dataset, &extractor)?;
    let config = AblationConfig {
        hyperparams: hyperparams(solver),
        train_fraction: train_frac,
        seed: cli.seed,
        folds,
        damping: walk.damping,
        walk_tol: walk.walk_tol,
        walk_max_iter: walk.walk_max_iter,
    };
    let rows = run_ablation(&config, &data)?;
    let table = nsi::eval::format_metrics_table(&rows);
    fs::write(out, &table)?;
    say(cli, table.trim_end().to_string());

    let mut manifest = ManifestBuilder::new("ablate");
    solver_flags(&mut manifest, solver);
    walk_flags(&mut manifest, walk);
    feature_flags(&mut manifest, features);
    manifest
        .flag("train_frac", io::fmt_g17(train_frac))
        .flag("folds", folds)
        .flag("seed", cli.seed)
        .flag("out", base_name(out));
    manifest.input("tweets", tweets)?;
    manifest.input("edges", edges)?;
    manifest.write(&manifest_dir(&cli.manifest_dir, out))?;
    Ok(())
}
