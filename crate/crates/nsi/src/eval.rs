//! Metrics, deterministic stratified splits and the ablation harness that
//! contrasts the combined model with its content-only and network-only
//! reductions.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::{build_matrix, ColumnNorm, ExtractorConfig, FeatureGroups, FeatureMatrix};
use crate::graph::TweetGraph;
use crate::laplacian::{laplacian, GraphLaplacian};
use crate::solver::{fit_with_graph, predict, Class, Hyperparams, LabelMatrix};
use crate::sparse::SparseMatrix;
use crate::walk::{stationary_distribution, transition_matrix};

/// Binary confusion counts; the positive class is the target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn from_labels(truth: &[Class], predicted: &[Class]) -> Self {
        assert_eq!(truth.len(), predicted.len());
        let mut c = ConfusionCounts::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Class::Positive, Class::Positive) => c.true_pos += 1,
                (Class::Negative, Class::Positive) => c.false_pos += 1,
                (Class::Negative, Class::Negative) => c.true_neg += 1,
                (Class::Positive, Class::Negative) => c.false_neg += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Zero denominators yield zero by convention.
pub fn metrics(c: &ConfusionCounts) -> MetricsReport {
    let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    MetricsReport {
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Harmonic mean of precision and recall; zero when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Deterministic stratified split: class proportions are preserved within
/// one tweet and every class keeps at least one test member.
pub fn stratified_split(
    labels: &[Class],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidFraction(fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut saw = [false, false];
    for class in [Class::Negative, Class::Positive] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect();
        if members.is_empty() {
            continue;
        }
        saw[class.index()] = true;
        members.shuffle(&mut rng);
        let want = (fraction * members.len() as f64).round() as usize;
        let n_train = want.min(members.len() - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    if !(saw[0] && saw[1]) {
        return Err(Error::SingleClass);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Deterministic stratified k-fold partition; fold `i` is the test set of
/// split `i`.
pub fn stratified_folds(
    labels: &[Class],
    folds: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if folds < 2 {
        return Err(Error::DegenerateConfig(format!(
            "k-fold needs at least 2 folds, got {folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    let mut saw = [false, false];
    for class in [Class::Negative, Class::Positive] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect();
        if members.is_empty() {
            continue;
        }
        saw[class.index()] = true;
        members.shuffle(&mut rng);
        for (slot, &idx) in members.iter().enumerate() {
            assignment[idx] = slot % folds;
        }
    }
    if !(saw[0] && saw[1]) {
        return Err(Error::SingleClass);
    }
    Ok((0..folds)
        .map(|fold| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (idx, &f) in assignment.iter().enumerate() {
                if f == fold {
                    test.push(idx);
                } else {
                    train.push(idx);
                }
            }
            (train, test)
        })
        .collect())
}

/// Which signals the model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationMode {
    /// Content features plus the graph penalty.
    Combined,
    /// Content features only (graph strength forced to zero).
    ContentOnly,
    /// Each tweet's feature vector is its adjacency row; no graph penalty.
    NetworkOnly,
}

impl AblationMode {
    pub const ALL: [AblationMode; 3] = [
        AblationMode::Combined,
        AblationMode::ContentOnly,
        AblationMode::NetworkOnly,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationMode::Combined => "combined",
            AblationMode::ContentOnly => "content_only",
            AblationMode::NetworkOnly => "network_only",
        }
    }
}

/// Split protocol plus the solver and walk settings shared by the modes.
#[derive(Debug, Clone)]
pub struct AblationConfig {
    pub hyperparams: Hyperparams,
    pub train_fraction: f64,
    pub seed: u64,
    /// With `folds >= 2` the split becomes a stratified k-fold and the
    /// reported numbers are fold averages.
    pub folds: usize,
    pub damping: f64,
    pub walk_tol: f64,
    pub walk_max_iter: usize,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            hyperparams: Hyperparams::default(),
            train_fraction: 0.8,
            seed: 0,
            folds: 1,
            damping: 0.85,
            walk_tol: 1e-12,
            walk_max_iter: 100_000,
        }
    }
}

/// The assembled inputs the harness works on: graph, features and labels
/// over the labeled tweets, one shared index.
#[derive(Debug, Clone)]
pub struct AblationData {
    pub graph: TweetGraph,
    pub x: FeatureMatrix,
    pub groups: FeatureGroups,
    pub labels: Vec<Class>,
}

impl AblationData {
    /// Restricts a data set to its labeled tweets and extracts features.
    pub fn from_dataset(dataset: &Dataset, extractor: &ExtractorConfig) -> Result<AblationData> {
        let labeled = dataset.labeled_indices();
        if labeled.is_empty() {
            return Err(Error::EmptyInput("no labeled tweets".into()));
        }
        let graph = dataset.graph.subgraph(&labeled);
        let records: Vec<_> = labeled.iter().map(|&i| dataset.records[i].clone()).collect();
        let labels: Vec<Class> = labeled.iter().map(|&i| dataset.labels[i].unwrap()).collect();
        let (x, vocab) = build_matrix(&records, None, extractor)?;
        let groups = crate::features::assign_groups(&vocab);
        Ok(AblationData {
            graph,
            x,
            groups,
            labels,
        })
    }
}

/// One line of the ablation table.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub mode: AblationMode,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Tweet-graph adjacency rows as a feature matrix (unit-normalized).
pub fn adjacency_features(graph: &TweetGraph) -> FeatureMatrix {
    let mut data = SparseMatrix::from_dense(graph.adjacency());
    data.l2_normalize_columns();
    FeatureMatrix::from_parts(data, graph.node_ids().to_vec(), ColumnNorm::UnitL2)
}

/// Runs one mode over the configured split(s) and averages the metrics.
///
/// The combined mode spans the graph penalty over every labeled tweet,
/// train and test alike (labels still enter through the train columns
/// only): the smoothing pulls a test tweet's score toward its neighbors,
/// which is the mechanism the penalty exists for.
pub fn run_mode(
    mode: AblationMode,
    config: &AblationConfig,
    data: &AblationData,
) -> Result<AblationRow> {
    let splits = if config.folds >= 2 {
        stratified_folds(&data.labels, config.folds, config.seed)?
    } else {
        vec![stratified_split(
            &data.labels,
            config.train_fraction,
            config.seed,
        )?]
    };

    let lap = match mode {
        AblationMode::Combined if config.hyperparams.lambda_s > 0.0 => {
            let p = transition_matrix(&data.graph, config.damping)?;
            let pi = stationary_distribution(&p, config.walk_tol, config.walk_max_iter)?;
            Some(laplacian(&p, &pi)?)
        }
        _ => None,
    };

    let mut sums = (0.0, 0.0, 0.0);
    for (train, test) in &splits {
        let report = run_single(mode, config, data, lap.as_ref(), train, test)?;
        sums.0 += report.f1;
        sums.1 += report.precision;
        sums.2 += report.recall;
    }
    let k = splits.len() as f64;
    Ok(AblationRow {
        mode,
        f1: sums.0 / k,
        precision: sums.1 / k,
        recall: sums.2 / k,
    })
}

fn run_single(
    mode: AblationMode,
    config: &AblationConfig,
    data: &AblationData,
    lap: Option<&GraphLaplacian>,
    train: &[usize],
    test: &[usize],
) -> Result<MetricsReport> {
    let truth: Vec<Class> = test.iter().map(|&i| data.labels[i]).collect();
    let y_train =
        LabelMatrix::from_classes(&train.iter().map(|&i| data.labels[i]).collect::<Vec<_>>());

    let (x_full, groups, hyper) = match mode {
        AblationMode::Combined => (
            data.x.clone(),
            data.groups.clone(),
            config.hyperparams.clone(),
        ),
        AblationMode::ContentOnly => {
            let mut h = config.hyperparams.clone();
            h.lambda_s = 0.0;
            (data.x.clone(), data.groups.clone(), h)
        }
        AblationMode::NetworkOnly => {
            let mut h = config.hyperparams.clone();
            h.lambda_s = 0.0;
            let x = adjacency_features(&data.graph);
            let groups = FeatureGroups::singletons(x.nrows());
            (x, groups, h)
        }
    };

    let x_train = x_full.select_columns(train);
    let graph_term = match (hyper.lambda_s > 0.0, lap) {
        (true, Some(l)) => Some((&x_full, l)),
        _ => None,
    };
    let (w, _) = fit_with_graph(&x_train, &y_train, graph_term, &groups, &hyper)?;
    let predicted: Vec<Class> = test.iter().map(|&j| predict(&x_full, j, &w)).collect();
    Ok(metrics(&ConfusionCounts::from_labels(&truth, &predicted)))
}

/// Runs all three modes in their fixed order.
pub fn run_ablation(config: &AblationConfig, data: &AblationData) -> Result<Vec<AblationRow>> {
    AblationMode::ALL
        .iter()
        .map(|&mode| run_mode(mode, config, data))
        .collect()
}

/// Tab-separated table in the fixed column order, three decimals.
pub fn format_metrics_table(rows: &[AblationRow]) -> String {
    let named: Vec<(String, MetricsReport)> = rows
        .iter()
        .map(|r| {
            (
                r.mode.as_str().to_string(),
                MetricsReport {
                    precision: r.precision,
                    recall: r.recall,
                    f1: r.f1,
                },
            )
        })
        .collect();
    format_metrics_rows(&named)
}

/// Same table for arbitrary row labels.
pub fn format_metrics_rows(rows: &[(String, MetricsReport)]) -> String {
    let mut out = String::from("mode\tf1\tprecision\trecall\n");
    for (name, m) in rows {
        out.push_str(&format!(
            "{name}\t{:.3}\t{:.3}\t{:.3}\n",
            m.f1, m.precision, m.recall
        ));
    }
    out
}

/// Convenience for evaluating an existing weight matrix on labeled columns.
pub fn evaluate_predictions(
    x: &FeatureMatrix,
    w: &Array2<f64>,
    labels: &[Class],
) -> MetricsReport {
    let predicted: Vec<Class> = (0..x.ncols()).map(|j| predict(x, j, w)).collect();
    metrics(&ConfusionCounts::from_labels(labels, &predicted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn paper_row_reproduces_f1() {
        let f1 = f1_score(0.872, 0.870);
        assert_eq!(format!("{f1:.3}"), "0.871");
    }

    #[test]
    fn small_confusion_example() {
        let c = ConfusionCounts {
            true_pos: 3,
            false_pos: 1,
            true_neg: 0,
            false_neg: 1,
        };
        let m = metrics(&c);
        assert!((m.precision - 0.75).abs() < 1e-15);
        assert!((m.recall - 0.75).abs() < 1e-15);
        assert!((m.f1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_true_positives_yield_zero_by_convention() {
        let c = ConfusionCounts {
            true_pos: 0,
            false_pos: 0,
            true_neg: 5,
            false_neg: 0,
        };
        let m = metrics(&c);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn split_preserves_class_proportions() {
        let mut labels = vec![Class::Positive; 10];
        labels.extend(vec![Class::Negative; 90]);
        let (train, test) = stratified_split(&labels, 0.8, 7).unwrap();
        let train_pos = train.iter().filter(|&&i| labels[i] == Class::Positive).count();
        let train_neg = train.len() - train_pos;
        assert_eq!(train_pos, 8);
        assert_eq!(train_neg, 72);
        assert_eq!(train.len() + test.len(), 100);
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let labels: Vec<Class> = (0..40)
            .map(|i| if i % 5 == 0 { Class::Positive } else { Class::Negative })
            .collect();
        let a = stratified_split(&labels, 0.75, 99).unwrap();
        let b = stratified_split(&labels, 0.75, 99).unwrap();
        assert_eq!(a, b);
        let c = stratified_split(&labels, 0.75, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_fraction_is_rejected() {
        let labels = vec![Class::Positive, Class::Negative];
        assert!(matches!(
            stratified_split(&labels, 1.0, 0),
            Err(Error::InvalidFraction(_))
        ));
    }

    #[test]
    fn single_class_is_rejected() {
        let labels = vec![Class::Negative; 10];
        assert!(matches!(
            stratified_split(&labels, 0.8, 0),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn folds_partition_everything() {
        let labels: Vec<Class> = (0..23)
            .map(|i| if i % 4 == 0 { Class::Positive } else { Class::Negative })
            .collect();
        let folds = stratified_folds(&labels, 4, 3).unwrap();
        assert_eq!(folds.len(), 4);
        let mut seen = vec![0usize; labels.len()];
        for (train, test) in &folds {
            assert_eq!(train.len() + test.len(), labels.len());
            for &i in test {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn metric_permutation_invariance() {
        let truth = vec![
            Class::Positive,
            Class::Negative,
            Class::Positive,
            Class::Negative,
        ];
        let predicted = vec![
            Class::Positive,
            Class::Positive,
            Class::Negative,
            Class::Negative,
        ];
        let base = metrics(&ConfusionCounts::from_labels(&truth, &predicted));
        let perm = [2usize, 0, 3, 1];
        let truth_p: Vec<Class> = perm.iter().map(|&i| truth[i]).collect();
        let predicted_p: Vec<Class> = perm.iter().map(|&i| predicted[i]).collect();
        let permuted = metrics(&ConfusionCounts::from_labels(&truth_p, &predicted_p));
        assert_eq!(base, permuted);
    }

    proptest! {
        #[test]
        fn f1_is_exact_harmonic_mean(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
            let c = ConfusionCounts { true_pos: tp, false_pos: fp, true_neg: 1, false_neg: fn_ };
            let m = metrics(&c);
            if m.precision + m.recall > 0.0 {
                let lhs = m.f1 * (m.precision + m.recall);
                let rhs = 2.0 * m.precision * m.recall;
                prop_assert!((lhs - rhs).abs() < 1e-12);
            } else {
                prop_assert_eq!(m.f1, 0.0);
            }
        }
    }
}
