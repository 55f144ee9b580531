//! Text file formats: edge lists, tweet records, annotations, coordinate
//! matrices, the tweet-graph file, the model file and prediction tables.
//!
//! Everything is UTF-8, tab- or space-separated, written in a fixed order
//! with full-precision numbers, so identical inputs produce byte-identical
//! files.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::features::{
    ColumnNorm, ExtractorConfig, Feature, FeatureFamilies, FeatureGroups, NgramOrder,
    TokenAnnotation, TweetRecord, Vocabulary,
};
use crate::graph::{TweetGraph, UserGraph};
use crate::solver::{Class, Hyperparams};

/// Formats a float like C's `%.17g`: up to 17 significant digits, decimal
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// trimmed. 17 digits make the text round-trip to the exact same bits.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp_str) = sci.split_once('e').expect("e-format always has an exponent");
    let exp: i32 = exp_str.parse().expect("exponent is an integer");
    if !(-4..17).contains(&exp) {
        let trimmed = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{trimmed}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}"))
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

// ---------------------------------------------------------------------------
// edge lists
// ---------------------------------------------------------------------------

/// Parses `src<TAB>dst<TAB>tweet_id[<TAB>weight]`; `#` lines are comments.
pub fn parse_edge_list(text: &str, origin: &str) -> Result<UserGraph> {
    let mut graph = UserGraph::new();
    let mut any = false;
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(parse_err(
                origin,
                line_no,
                format!("expected 3 or 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let weight = if fields.len() == 4 {
            fields[3]
                .parse::<f64>()
                .map_err(|_| parse_err(origin, line_no, format!("bad weight `{}`", fields[3])))?
        } else {
            1.0
        };
        graph
            .add_edge(fields[0], fields[1], fields[2], weight)
            .map_err(|e| match e {
                Error::DuplicateTweetId(_) | Error::NegativeWeight { .. } => e,
                other => other,
            })?;
        any = true;
    }
    if !any {
        return Err(Error::EmptyInput(format!("{origin} holds no edges")));
    }
    Ok(graph)
}

pub fn read_edge_list(path: &Path) -> Result<UserGraph> {
    let text = fs::read_to_string(path)?;
    parse_edge_list(&text, &path.display().to_string())
}

pub fn format_edge_list(graph: &UserGraph) -> String {
    let mut out = String::new();
    for e in graph.edges() {
        if e.weight == 1.0 {
            let _ = writeln!(out, "{}\t{}\t{}", e.src, e.dst, e.tweet);
        } else {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", e.src, e.dst, e.tweet, fmt_g17(e.weight));
        }
    }
    out
}

pub fn write_edge_list(graph: &UserGraph, path: &Path) -> Result<()> {
    fs::write(path, format_edge_list(graph))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// tweet records
// ---------------------------------------------------------------------------

/// Parses `tweet_id<TAB>label<TAB>text`; the label is `1`, `0` or `?`.
/// The text may itself contain tabs.
pub fn parse_records(text: &str, origin: &str) -> Result<(Vec<TweetRecord>, Vec<Option<Class>>)> {
    let mut records = Vec::new();
    let mut labels = Vec::new();
    for (line_no, line) in content_lines(text) {
        let mut fields = line.splitn(3, '\t');
        let id = fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| parse_err(origin, line_no, "missing tweet id"))?;
        let label = fields
            .next()
            .ok_or_else(|| parse_err(origin, line_no, "missing label field"))?;
        let body = fields.next().unwrap_or("");
        let label = match label {
            "1" => Some(Class::Positive),
            "0" => Some(Class::Negative),
            "?" => None,
            other => {
                return Err(parse_err(
                    origin,
                    line_no,
                    format!("label must be 0, 1 or ?, got `{other}`"),
                ))
            }
        };
        records.push(TweetRecord::new(id, body));
        labels.push(label);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput(format!("{origin} holds no records")));
    }
    Ok((records, labels))
}

pub fn read_records(path: &Path) -> Result<(Vec<TweetRecord>, Vec<Option<Class>>)> {
    let text = fs::read_to_string(path)?;
    parse_records(&text, &path.display().to_string())
}

pub fn format_records(records: &[TweetRecord], labels: &[Option<Class>]) -> String {
    let mut out = String::new();
    for (r, label) in records.iter().zip(labels) {
        let tag = match label {
            Some(Class::Positive) => "1",
            Some(Class::Negative) => "0",
            None => "?",
        };
        let _ = writeln!(out, "{}\t{}\t{}", r.tweet_id, tag, r.text);
    }
    out
}

pub fn write_records(
    records: &[TweetRecord],
    labels: &[Option<Class>],
    path: &Path,
) -> Result<()> {
    fs::write(path, format_records(records, labels))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// annotations
// ---------------------------------------------------------------------------

/// Attaches `tweet_id<TAB>token_index<TAB>pos<TAB>entity` lines to their
/// records. `-` means no entity. Tokens without a line keep the placeholder
/// label `_`.
pub fn attach_annotations(records: &mut [TweetRecord], text: &str, origin: &str) -> Result<()> {
    let index: HashMap<String, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.tweet_id.clone(), i))
        .collect();
    let mut token_counts: HashMap<usize, usize> = HashMap::new();
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                origin,
                line_no,
                format!("expected 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let rec_idx = *index.get(fields[0]).ok_or_else(|| {
            parse_err(origin, line_no, format!("unknown tweet id `{}`", fields[0]))
        })?;
        let token_idx: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(origin, line_no, format!("bad token index `{}`", fields[1])))?;
        let n_tokens = *token_counts
            .entry(rec_idx)
            .or_insert_with(|| records[rec_idx].tokens().len());
        if token_idx >= n_tokens {
            return Err(parse_err(
                origin,
                line_no,
                format!(
                    "token index {token_idx} out of range for `{}` ({n_tokens} tokens)",
                    fields[0]
                ),
            ));
        }
        let entity = match fields[3] {
            "-" | "" => None,
            kind => Some(
                kind.parse()
                    .map_err(|e: String| parse_err(origin, line_no, e))?,
            ),
        };
        let record = &mut records[rec_idx];
        let slots = record.annotations.get_or_insert_with(|| {
            vec![
                TokenAnnotation {
                    pos: "_".to_string(),
                    entity: None,
                };
                n_tokens
            ]
        });
        slots[token_idx] = TokenAnnotation {
            pos: fields[2].to_string(),
            entity,
        };
    }
    Ok(())
}

pub fn read_annotations(records: &mut [TweetRecord], path: &Path) -> Result<()> {
    let text = fs::read_to_string(path)?;
    attach_annotations(records, &text, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// coordinate matrices
// ---------------------------------------------------------------------------

/// `nrows ncols nnz` header, then `i j value` entries in row-major order,
/// 0-based, full precision. Comment lines may precede the header.
pub fn format_coordinate(matrix: &Array2<f64>, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let entries: Vec<(usize, usize, f64)> = matrix
        .indexed_iter()
        .filter(|(_, &v)| v != 0.0)
        .map(|((i, j), &v)| (i, j, v))
        .collect();
    let _ = writeln!(out, "{} {} {}", matrix.nrows(), matrix.ncols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{i} {j} {}", fmt_g17(v));
    }
    out
}

pub fn parse_coordinate(text: &str, origin: &str) -> Result<Array2<f64>> {
    let mut lines = content_lines(text);
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::EmptyInput(format!("{origin} holds no matrix")))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(parse_err(origin, line_no, "header must be `nrows ncols nnz`"));
    }
    let nrows: usize = dims[0]
        .parse()
        .map_err(|_| parse_err(origin, line_no, "bad row count"))?;
    let ncols: usize = dims[1]
        .parse()
        .map_err(|_| parse_err(origin, line_no, "bad column count"))?;
    let nnz: usize = dims[2]
        .parse()
        .map_err(|_| parse_err(origin, line_no, "bad entry count"))?;
    let mut matrix = Array2::<f64>::zeros((nrows, ncols));
    let mut seen = 0usize;
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(origin, line_no, "entry must be `i j value`"));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad row index"))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad column index"))?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad value"))?;
        if i >= nrows || j >= ncols {
            return Err(parse_err(origin, line_no, format!("index ({i}, {j}) out of range")));
        }
        matrix[[i, j]] = v;
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(
            origin,
            0,
            format!("header promised {nnz} entries, found {seen}"),
        ));
    }
    Ok(matrix)
}

pub fn write_coordinate(matrix: &Array2<f64>, comments: &[String], path: &Path) -> Result<()> {
    fs::write(path, format_coordinate(matrix, comments))?;
    Ok(())
}

pub fn read_coordinate(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path)?;
    parse_coordinate(&text, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// tweet-graph file
// ---------------------------------------------------------------------------

/// Coordinate file of the symmetric adjacency, with the id-to-index map
/// carried in `# node` comment lines.
pub fn format_tweet_graph(graph: &TweetGraph) -> String {
    let mut comments = vec!["tweet-graph 1".to_string()];
    for (i, id) in graph.node_ids().iter().enumerate() {
        comments.push(format!("node {i} {id}"));
    }
    format_coordinate(graph.adjacency(), &comments)
}

pub fn parse_tweet_graph(text: &str, origin: &str) -> Result<TweetGraph> {
    let mut ids = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("# node ") {
            let mut fields = rest.splitn(2, ' ');
            let idx: usize = fields
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|_| parse_err(origin, line_no + 1, "bad node index"))?;
            let id = fields
                .next()
                .ok_or_else(|| parse_err(origin, line_no + 1, "missing node id"))?;
            if idx != ids.len() {
                return Err(parse_err(origin, line_no + 1, "node lines out of order"));
            }
            ids.push(id.to_string());
        }
    }
    let adjacency = parse_coordinate(text, origin)?;
    if ids.len() != adjacency.nrows() {
        return Err(parse_err(
            origin,
            0,
            format!("{} node lines for a {}-row matrix", ids.len(), adjacency.nrows()),
        ));
    }
    TweetGraph::from_adjacency(ids, adjacency)
}

pub fn write_tweet_graph(graph: &TweetGraph, path: &Path) -> Result<()> {
    fs::write(path, format_tweet_graph(graph))?;
    Ok(())
}

pub fn read_tweet_graph(path: &Path) -> Result<TweetGraph> {
    let text = fs::read_to_string(path)?;
    parse_tweet_graph(&text, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// word lists
// ---------------------------------------------------------------------------

/// One word per line, `#` comments allowed.
pub fn parse_word_list(text: &str) -> HashSet<String> {
    content_lines(text).map(|(_, l)| l.trim().to_string()).collect()
}

pub fn read_word_list(path: &Path) -> Result<HashSet<String>> {
    Ok(parse_word_list(&fs::read_to_string(path)?))
}

// ---------------------------------------------------------------------------
// model file
// ---------------------------------------------------------------------------

/// Everything needed to score new tweets: weights, vocabulary, groups and
/// the extraction settings that produced the features.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub w: Array2<f64>,
    pub vocab: Vocabulary,
    pub groups: FeatureGroups,
    pub hyper: Hyperparams,
    pub extractor: ExtractorConfig,
    /// Training column count, recorded for provenance.
    pub n_train: usize,
}

const MODEL_VERSION: &str = "1";

pub fn format_model(model: &TrainedModel) -> String {
    let m = model.vocab.len();
    let c = model.w.ncols();
    assert_eq!(model.w.nrows(), m, "weights must align with the vocabulary");
    let mut out = String::new();
    let _ = writeln!(out, "nsi-model {MODEL_VERSION}");
    let _ = writeln!(out, "class_order\tnegative\tpositive");
    let _ = writeln!(out, "m\t{m}");
    let _ = writeln!(out, "n\t{}", model.n_train);
    let _ = writeln!(out, "c\t{c}");
    let _ = writeln!(out, "lambda1\t{}", fmt_g17(model.hyper.lambda1));
    let _ = writeln!(out, "lambda2\t{}", fmt_g17(model.hyper.lambda2));
    let _ = writeln!(out, "lambda_s\t{}", fmt_g17(model.hyper.lambda_s));
    let _ = writeln!(out, "epsilon\t{}", fmt_g17(model.hyper.epsilon));
    let _ = writeln!(out, "tol\t{}", fmt_g17(model.hyper.tol));
    let _ = writeln!(out, "max_iter\t{}", model.hyper.max_iter);
    let _ = writeln!(out, "column_norm\t{}", model.extractor.column_norm.as_str());
    let _ = writeln!(out, "ngram_order\t{}", model.extractor.ngram_order.max_len());
    let _ = writeln!(out, "pos_colored\t{}", model.extractor.pos_colored);
    let _ = writeln!(out, "min_count\t{}", model.extractor.min_count);
    let families = &model.extractor.families;
    let enabled: Vec<&str> = [
        ("words", families.words),
        ("tags", families.tags),
        ("morphology", families.morphology),
        ("entities", families.entities),
        ("length", families.length),
    ]
    .iter()
    .filter_map(|&(name, on)| on.then_some(name))
    .collect();
    let _ = writeln!(out, "families\t{}", enabled.join(","));
    let mut quantifiers: Vec<&String> = model.extractor.quantifier_lexicon.iter().collect();
    quantifiers.sort();
    let _ = writeln!(out, "quantifiers\t{}", quantifiers.len());
    for q in quantifiers {
        let _ = writeln!(out, "{q}");
    }
    let _ = writeln!(out, "vocab\t{m}");
    for (row, key) in model.vocab.keys().iter().enumerate() {
        let _ = writeln!(out, "{row}\t{key}\t{}", model.groups.group_of(row));
    }
    let _ = writeln!(out, "weights\t{}", m * c);
    for row in 0..m {
        for col in 0..c {
            let _ = writeln!(out, "{row}\t{col}\t{}", fmt_g17(model.w[[row, col]]));
        }
    }
    out
}

pub fn parse_model(text: &str, origin: &str) -> Result<TrainedModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        lines
            .next()
            .map(|(n, l)| (n, l.to_string()))
            .ok_or_else(|| parse_err(origin, 0, format!("missing {what}")))
    };
    let (line_no, header) = next("header")?;
    let version = header
        .strip_prefix("nsi-model ")
        .ok_or_else(|| parse_err(origin, line_no, "not a model file"))?;
    if version != MODEL_VERSION {
        return Err(Error::ModelVersion(version.to_string()));
    }

    let mut fields: HashMap<String, String> = HashMap::new();
    let (line_no, class_order) = next("class order")?;
    if class_order != "class_order\tnegative\tpositive" {
        return Err(parse_err(origin, line_no, "unexpected class order"));
    }
    for key in [
        "m",
        "n",
        "c",
        "lambda1",
        "lambda2",
        "lambda_s",
        "epsilon",
        "tol",
        "max_iter",
        "column_norm",
        "ngram_order",
        "pos_colored",
        "min_count",
        "families",
    ] {
        let (line_no, line) = next(key)?;
        let (name, value) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(origin, line_no, "expected `key<TAB>value`"))?;
        if name != key {
            return Err(parse_err(origin, line_no, format!("expected `{key}`, found `{name}`")));
        }
        fields.insert(key.to_string(), value.to_string());
    }
    let get = |key: &str| fields.get(key).expect("collected above").clone();
    let parse_f64 = |key: &str| -> Result<f64> {
        get(key)
            .parse()
            .map_err(|_| parse_err(origin, 0, format!("bad float for `{key}`")))
    };
    let parse_usize = |key: &str| -> Result<usize> {
        get(key)
            .parse()
            .map_err(|_| parse_err(origin, 0, format!("bad integer for `{key}`")))
    };

    let m = parse_usize("m")?;
    let n_train = parse_usize("n")?;
    let c = parse_usize("c")?;
    let hyper = Hyperparams {
        lambda1: parse_f64("lambda1")?,
        lambda2: parse_f64("lambda2")?,
        lambda_s: parse_f64("lambda_s")?,
        epsilon: parse_f64("epsilon")?,
        tol: parse_f64("tol")?,
        max_iter: parse_usize("max_iter")?,
    };
    let column_norm: ColumnNorm = get("column_norm")
        .parse()
        .map_err(|e: String| parse_err(origin, 0, e))?;
    let ngram_order = match get("ngram_order").as_str() {
        "1" => NgramOrder::Unigram,
        "2" => NgramOrder::UnigramBigram,
        other => return Err(parse_err(origin, 0, format!("bad ngram order `{other}`"))),
    };
    let pos_colored = get("pos_colored") == "true";
    let min_count = parse_usize("min_count")?;
    let families_set: HashSet<String> = get("families").split(',').map(String::from).collect();
    let families = FeatureFamilies {
        words: families_set.contains("words"),
        tags: families_set.contains("tags"),
        morphology: families_set.contains("morphology"),
        entities: families_set.contains("entities"),
        length: families_set.contains("length"),
    };

    let (line_no, quant_header) = next("quantifier header")?;
    let count: usize = quant_header
        .strip_prefix("quantifiers\t")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(origin, line_no, "expected `quantifiers<TAB>count`"))?;
    let mut quantifier_lexicon = HashSet::new();
    for _ in 0..count {
        let (_, word) = next("quantifier word")?;
        quantifier_lexicon.insert(word);
    }

    let (line_no, vocab_header) = next("vocabulary header")?;
    let vocab_len: usize = vocab_header
        .strip_prefix("vocab\t")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(origin, line_no, "expected `vocab<TAB>count`"))?;
    if vocab_len != m {
        return Err(parse_err(origin, line_no, "vocab count disagrees with m"));
    }
    let mut features = Vec::with_capacity(m);
    let mut group_ids = Vec::with_capacity(m);
    for expected_row in 0..m {
        let (line_no, line) = next("vocabulary row")?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(origin, line_no, "vocab row must be `row<TAB>descriptor<TAB>group`"));
        }
        let row: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad row index"))?;
        if row != expected_row {
            return Err(parse_err(origin, line_no, "vocab rows out of order"));
        }
        let feature: Feature = fields[1]
            .parse()
            .map_err(|e: String| parse_err(origin, line_no, e))?;
        let group: usize = fields[2]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad group id"))?;
        features.push(feature);
        group_ids.push(group);
    }
    let vocab = Vocabulary::from_features(features);
    if vocab.len() != m {
        return Err(parse_err(origin, 0, "vocabulary descriptors are not unique"));
    }
    let groups = FeatureGroups::from_keys(
        group_ids.iter().map(|g| format!("{g:08}")).collect(),
    );

    let (line_no, weight_header) = next("weight header")?;
    let n_weights: usize = weight_header
        .strip_prefix("weights\t")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(origin, line_no, "expected `weights<TAB>count`"))?;
    if n_weights != m * c {
        return Err(parse_err(origin, line_no, "weight count disagrees with m*c"));
    }
    let mut w = Array2::<f64>::zeros((m, c));
    for _ in 0..n_weights {
        let (line_no, line) = next("weight row")?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(origin, line_no, "weight row must be `row<TAB>col<TAB>value`"));
        }
        let row: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad row index"))?;
        let col: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad column index"))?;
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad weight value"))?;
        if row >= m || col >= c {
            return Err(parse_err(origin, line_no, "weight index out of range"));
        }
        w[[row, col]] = value;
    }

    Ok(TrainedModel {
        w,
        vocab,
        groups,
        hyper,
        extractor: ExtractorConfig {
            ngram_order,
            pos_colored,
            min_count,
            families,
            column_norm,
            quantifier_lexicon,
        },
        n_train,
    })
}

pub fn write_model(model: &TrainedModel, path: &Path) -> Result<()> {
    fs::write(path, format_model(model))?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<TrainedModel> {
    let text = fs::read_to_string(path)?;
    parse_model(&text, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// predictions
// ---------------------------------------------------------------------------

/// `tweet_id<TAB>class<TAB>score0<TAB>score1` lines.
pub fn format_predictions(rows: &[(String, Class, f64, f64)]) -> String {
    let mut out = String::new();
    for (id, class, s0, s1) in rows {
        let _ = writeln!(
            out,
            "{id}\t{}\t{}\t{}",
            class.index(),
            fmt_g17(*s0),
            fmt_g17(*s1)
        );
    }
    out
}

pub fn parse_predictions(text: &str, origin: &str) -> Result<Vec<(String, Class, f64, f64)>> {
    let mut rows = Vec::new();
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(origin, line_no, "expected 4 tab-separated fields"));
        }
        let class = match fields[1] {
            "0" => Class::Negative,
            "1" => Class::Positive,
            other => return Err(parse_err(origin, line_no, format!("bad class `{other}`"))),
        };
        let s0: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad score"))?;
        let s1: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(origin, line_no, "bad score"))?;
        rows.push((fields[0].to_string(), class, s0, s1));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!("{origin} holds no predictions")));
    }
    Ok(rows)
}

pub fn write_predictions(rows: &[(String, Class, f64, f64)], path: &Path) -> Result<()> {
    fs::write(path, format_predictions(rows))?;
    Ok(())
}

pub fn read_predictions(path: &Path) -> Result<Vec<(String, Class, f64, f64)>> {
    let text = fs::read_to_string(path)?;
    parse_predictions(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn g17_formats_reference_values() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(0.925), "0.92500000000000004");
        assert_eq!(fmt_g17(1e20), "1e+20");
        // 1e-5 is not exactly representable; 17 significant digits show it
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(0.0001), "0.0001");
        assert_eq!(fmt_g17(0.0000125), "1.2500000000000001e-05");
        assert_eq!(fmt_g17(3.0517578125e-05), "3.0517578125e-05"); // exact power of two
    }

    proptest! {
        #[test]
        fn g17_round_trips_exactly(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let parsed: f64 = fmt_g17(v).parse().unwrap();
            prop_assert!(parsed == v || (parsed == 0.0 && v == 0.0));
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "# interactions\nu1\tu2\tt1\nu2\tu3\tt2\t2.5\n";
        let g = parse_edge_list(text, "test").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edges()[1].weight, 2.5);
        let again = parse_edge_list(&format_edge_list(&g), "round").unwrap();
        assert_eq!(again.edges(), g.edges());
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = parse_edge_list("u1\tu2\n", "bad.tsv").unwrap_err();
        assert!(err.to_string().contains("bad.tsv:1"));
        let empty = parse_edge_list("# nothing\n", "empty.tsv").unwrap_err();
        assert!(matches!(empty, Error::EmptyInput(_)));
    }

    #[test]
    fn records_round_trip_with_unknown_labels() {
        let text = "t1\t1\tfound in #city\nt2\t?\twho knows\nt3\t0\tnothing\n";
        let (records, labels) = parse_records(text, "r").unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(labels[1], None);
        let out = format_records(&records, &labels);
        assert_eq!(out, text);
    }

    #[test]
    fn record_text_may_contain_tabs() {
        let (records, _) = parse_records("t1\t0\tleft\tright\n", "r").unwrap();
        assert_eq!(records[0].text, "left\tright");
    }

    #[test]
    fn annotations_attach_by_token_index() {
        let mut records = vec![TweetRecord::new("t1", "alice went home")];
        let text = "t1\t0\tN\tNAME\nt1\t1\tV\t-\n";
        attach_annotations(&mut records, text, "a").unwrap();
        let ann = records[0].annotations.as_ref().unwrap();
        assert_eq!(ann.len(), 3);
        assert_eq!(ann[0].pos, "N");
        assert_eq!(ann[0].entity, Some(crate::features::EntityKind::Name));
        assert_eq!(ann[2].pos, "_");
    }

    #[test]
    fn annotation_bounds_are_checked() {
        let mut records = vec![TweetRecord::new("t1", "short")];
        let err = attach_annotations(&mut records, "t1\t5\tN\t-\n", "a").unwrap_err();
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn coordinate_round_trip() {
        let m = array![[0.0, 1.5], [-2.25, 0.0]];
        let text = format_coordinate(&m, &["hello".to_string()]);
        assert!(text.starts_with("# hello\n2 2 2\n"));
        let back = parse_coordinate(&text, "c").unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn coordinate_entry_count_is_validated() {
        let err = parse_coordinate("2 2 3\n0 0 1\n", "c").unwrap_err();
        assert!(err.to_string().contains("promised 3"));
    }

    #[test]
    fn tweet_graph_round_trip() {
        let ids = vec!["t1".to_string(), "t2".to_string()];
        let g = TweetGraph::from_adjacency(ids, array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let text = format_tweet_graph(&g);
        let back = parse_tweet_graph(&text, "g").unwrap();
        assert_eq!(back.node_ids(), g.node_ids());
        assert_eq!(back.adjacency(), g.adjacency());
    }

    #[test]
    fn model_round_trip() {
        use crate::features::assign_groups;
        let records = vec![
            TweetRecord::new("t1", "find the kid ! 3"),
            TweetRecord::new("t2", "find a place ?"),
        ];
        let cfg = ExtractorConfig {
            min_count: 1,
            quantifier_lexicon: ["the".to_string()].into_iter().collect(),
            ..ExtractorConfig::default()
        };
        let (x, vocab) = crate::features::build_matrix(&records, None, &cfg).unwrap();
        let groups = assign_groups(&vocab);
        let w = Array2::from_shape_fn((vocab.len(), 2), |(i, j)| {
            (i as f64 + 1.0) * 0.125 - j as f64 * 0.33333333333333331
        });
        let model = TrainedModel {
            w: w.clone(),
            vocab: vocab.clone(),
            groups: groups.clone(),
            hyper: Hyperparams::default(),
            extractor: cfg,
            n_train: x.ncols(),
        };
        let text = format_model(&model);
        let back = parse_model(&text, "m").unwrap();
        assert_eq!(back.w, w);
        assert_eq!(back.vocab.keys(), vocab.keys());
        assert_eq!(back.groups.groups(), groups.groups());
        assert_eq!(back.hyper, model.hyper);
        assert_eq!(back.n_train, 2);
        assert_eq!(
            back.extractor.quantifier_lexicon,
            model.extractor.quantifier_lexicon
        );
        // byte-stable re-serialization
        assert_eq!(format_model(&back), text);
    }

    #[test]
    fn model_version_is_enforced() {
        let err = parse_model("nsi-model 9\n", "m").unwrap_err();
        assert!(matches!(err, Error::ModelVersion(v) if v == "9"));
    }

    #[test]
    fn predictions_round_trip() {
        let rows = vec![
            ("t1".to_string(), Class::Positive, -0.125, 0.75),
            ("t2".to_string(), Class::Negative, 0.5, 0.25),
        ];
        let text = format_predictions(&rows);
        let back = parse_predictions(&text, "p").unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn word_list_skips_comments() {
        let words = parse_word_list("# lexicon\nmany\nfew\n\n");
        assert_eq!(words.len(), 2);
        assert!(words.contains("many"));
    }
}
