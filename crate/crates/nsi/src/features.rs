//! Content features: tokenization, per-record extraction, the vocabulary
//! and the grouped sparse feature matrix.
//!
//! Part-of-speech tags and named entities are *inputs*: records may carry
//! per-token annotations produced by any external annotator, and extraction
//! degrades to zero counts when they are absent. Nothing here tries to be a
//! linguistically serious tokenizer; the rules below are simple, documented
//! and deterministic, which is what the matrix pipeline needs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Entity kinds carried by annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Name,
    Location,
    Org,
    Time,
}

impl EntityKind {
    pub const ALL: [EntityKind; 4] = [
        EntityKind::Name,
        EntityKind::Location,
        EntityKind::Org,
        EntityKind::Time,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityKind::Name => "name",
            EntityKind::Location => "location",
            EntityKind::Org => "org",
            EntityKind::Time => "time",
        }
    }
}

impl FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "name" => Ok(EntityKind::Name),
            "location" => Ok(EntityKind::Location),
            "org" | "organization" => Ok(EntityKind::Org),
            "time" => Ok(EntityKind::Time),
            other => Err(format!("unknown entity kind `{other}`")),
        }
    }
}

/// Morphological count kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MorphKind {
    Number,
    Question,
    Exclamation,
    Quantifier,
}

impl MorphKind {
    pub const ALL: [MorphKind; 4] = [
        MorphKind::Number,
        MorphKind::Question,
        MorphKind::Exclamation,
        MorphKind::Quantifier,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MorphKind::Number => "number",
            MorphKind::Question => "question",
            MorphKind::Exclamation => "exclamation",
            MorphKind::Quantifier => "quantifier",
        }
    }
}

/// Per-token annotation supplied by an external annotator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenAnnotation {
    pub pos: String,
    pub entity: Option<EntityKind>,
}

/// One tweet. Hashtags are recovered from the text when the record is
/// constructed; annotations, when present, are indexed by token position.
#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub text: String,
    pub tags: Vec<String>,
    pub annotations: Option<Vec<TokenAnnotation>>,
}

impl TweetRecord {
    pub fn new(tweet_id: &str, text: &str) -> Self {
        TweetRecord {
            tweet_id: tweet_id.to_string(),
            text: text.to_string(),
            tags: extract_tags(text),
            annotations: None,
        }
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.text)
    }
}

/// Hashtags: maximal alphanumeric runs following a `#`.
fn extract_tags(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '#' {
            let mut tag = String::new();
            while let Some(&next) = chars.peek() {
                if next.is_alphanumeric() {
                    tag.push(next);
                    chars.next();
                } else {
                    break;
                }
            }
            if !tag.is_empty() {
                tags.push(tag);
            }
        }
    }
    tags
}

/// Splits on whitespace and punctuation. Punctuation characters become
/// standalone tokens, with one documented exception: an ASCII apostrophe or
/// double quote immediately following a digit stays attached to the number
/// token, so measurements like `5'6"` survive as one token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut tokens, &mut current);
        } else if c.is_alphanumeric() {
            current.push(c);
        } else if (c == '\'' || c == '"')
            && current.chars().last().map_or(false, |l| l.is_ascii_digit())
        {
            current.push(c);
        } else {
            flush(&mut tokens, &mut current);
            tokens.push(c.to_string());
        }
    }
    flush(&mut tokens, &mut current);
    tokens
}

fn flush(tokens: &mut Vec<String>, current: &mut String) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}

/// A vocabulary entry. The canonical string form (via `Display`) defines the
/// vocabulary order and the on-disk descriptor format.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    /// Word n-gram, optionally pos-colored (one label per token).
    Word {
        tokens: Vec<String>,
        pos: Option<Vec<String>>,
    },
    TagPresence,
    TagCount,
    Morph(MorphKind),
    Ner(EntityKind),
    Length,
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Word { tokens, pos } => {
                write!(f, "w{}:", tokens.len())?;
                for (i, tok) in tokens.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    match pos {
                        Some(labels) => write!(f, "{tok}/{}", labels[i])?,
                        None => write!(f, "{tok}")?,
                    }
                }
                Ok(())
            }
            Feature::TagPresence => write!(f, "tag:presence"),
            Feature::TagCount => write!(f, "tag:count"),
            Feature::Morph(kind) => write!(f, "morph:{}", kind.as_str()),
            Feature::Ner(kind) => write!(f, "ner:{}", kind.as_str()),
            Feature::Length => write!(f, "len"),
        }
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "len" {
            return Ok(Feature::Length);
        }
        if s == "tag:presence" {
            return Ok(Feature::TagPresence);
        }
        if s == "tag:count" {
            return Ok(Feature::TagCount);
        }
        if let Some(kind) = s.strip_prefix("morph:") {
            return MorphKind::ALL
                .iter()
                .find(|k| k.as_str() == kind)
                .map(|&k| Feature::Morph(k))
                .ok_or_else(|| format!("unknown morph kind `{kind}`"));
        }
        if let Some(kind) = s.strip_prefix("ner:") {
            return kind.parse::<EntityKind>().map(Feature::Ner);
        }
        if let Some(rest) = s.strip_prefix('w') {
            let (order, body) = rest
                .split_once(':')
                .ok_or_else(|| format!("malformed word descriptor `{s}`"))?;
            let order: usize = order
                .parse()
                .map_err(|_| format!("malformed word descriptor `{s}`"))?;
            let parts: Vec<&str> = body.split(' ').collect();
            if parts.len() != order || order == 0 {
                return Err(format!("word descriptor `{s}` has wrong arity"));
            }
            // pos-colored descriptors mark every token as token/label; the
            // label is whatever follows the *last* slash
            let colored = parts.iter().all(|p| p.contains('/'));
            if colored {
                let mut tokens = Vec::new();
                let mut pos = Vec::new();
                for p in parts {
                    let (tok, label) = p.rsplit_once('/').unwrap();
                    tokens.push(tok.to_string());
                    pos.push(label.to_string());
                }
                Ok(Feature::Word {
                    tokens,
                    pos: Some(pos),
                })
            } else {
                Ok(Feature::Word {
                    tokens: parts.iter().map(|p| p.to_string()).collect(),
                    pos: None,
                })
            }
        } else {
            Err(format!("unknown descriptor `{s}`"))
        }
    }
}

/// N-gram order for word features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgramOrder {
    Unigram,
    UnigramBigram,
}

impl NgramOrder {
    pub fn max_len(&self) -> usize {
        match self {
            NgramOrder::Unigram => 1,
            NgramOrder::UnigramBigram => 2,
        }
    }
}

/// Word n-gram counts for one record. Pos-coloring appends each token's
/// part-of-speech label, which requires annotations.
pub fn extract_word_features(
    record: &TweetRecord,
    order: NgramOrder,
    pos_colored: bool,
) -> Result<BTreeMap<Feature, f64>> {
    let tokens = record.tokens();
    let labels: Option<Vec<String>> = if pos_colored {
        let ann = record
            .annotations
            .as_ref()
            .ok_or_else(|| Error::MissingAnnotations(record.tweet_id.clone()))?;
        Some(
            (0..tokens.len())
                .map(|i| {
                    ann.get(i)
                        .map(|a| a.pos.clone())
                        .unwrap_or_else(|| "_".to_string())
                })
                .collect(),
        )
    } else {
        None
    };
    let mut counts = BTreeMap::new();
    for len in 1..=order.max_len() {
        if tokens.len() < len {
            break;
        }
        for start in 0..=tokens.len() - len {
            let gram = tokens[start..start + len].to_vec();
            let pos = labels
                .as_ref()
                .map(|l| l[start..start + len].to_vec());
            *counts
                .entry(Feature::Word { tokens: gram, pos })
                .or_insert(0.0) += 1.0;
        }
    }
    Ok(counts)
}

/// Morphological counts for one record.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MorphCounts {
    pub numbers: u32,
    pub questions: u32,
    pub exclamations: u32,
    pub quantifiers: u32,
}

impl MorphCounts {
    pub fn get(&self, kind: MorphKind) -> u32 {
        match kind {
            MorphKind::Number => self.numbers,
            MorphKind::Question => self.questions,
            MorphKind::Exclamation => self.exclamations,
            MorphKind::Quantifier => self.quantifiers,
        }
    }
}

/// Counts numeric tokens, question marks (`?` and fullwidth `？`),
/// exclamation marks (`!` and `！`) and quantifier-lexicon hits.
pub fn extract_morphological(
    record: &TweetRecord,
    quantifier_lexicon: &HashSet<String>,
) -> MorphCounts {
    let mut counts = MorphCounts::default();
    for token in record.tokens() {
        match token.as_str() {
            "?" | "？" => counts.questions += 1,
            "!" | "！" => counts.exclamations += 1,
            _ => {
                if token.chars().any(|c| c.is_numeric()) {
                    counts.numbers += 1;
                }
                if quantifier_lexicon.contains(&token) {
                    counts.quantifiers += 1;
                }
            }
        }
    }
    counts
}

/// Tag, entity and length counts for one record.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TagNerLength {
    pub tag_presence: u32,
    pub tag_count: u32,
    pub ner: [u32; 4],
    pub length: u32,
}

impl TagNerLength {
    pub fn ner_count(&self, kind: EntityKind) -> u32 {
        self.ner[kind as usize]
    }
}

/// Tag presence/count, per-kind entity counts from annotations (zero when
/// absent) and tweet length in tokens.
pub fn extract_tag_ner_length(record: &TweetRecord) -> TagNerLength {
    let mut out = TagNerLength {
        tag_presence: u32::from(!record.tags.is_empty()),
        tag_count: record.tags.len() as u32,
        ner: [0; 4],
        length: record.tokens().len() as u32,
    };
    if let Some(annotations) = &record.annotations {
        for a in annotations {
            if let Some(kind) = a.entity {
                out.ner[kind as usize] += 1;
            }
        }
    }
    out
}

/// Which feature families participate in the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureFamilies {
    pub words: bool,
    pub tags: bool,
    pub morphology: bool,
    pub entities: bool,
    pub length: bool,
}

impl Default for FeatureFamilies {
    fn default() -> Self {
        FeatureFamilies {
            words: true,
            tags: true,
            morphology: true,
            entities: true,
            length: true,
        }
    }
}

/// Column scaling applied to the finished matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnNorm {
    None,
    UnitL2,
}

impl ColumnNorm {
    pub fn as_str(&self) -> &'static str {
        match self {
            ColumnNorm::None => "none",
            ColumnNorm::UnitL2 => "unit-l2",
        }
    }
}

impl FromStr for ColumnNorm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(ColumnNorm::None),
            "unit-l2" => Ok(ColumnNorm::UnitL2),
            other => Err(format!("unknown column norm `{other}`")),
        }
    }
}

/// Extraction configuration. Word n-grams below `min_count` total
/// occurrences are dropped from the vocabulary to keep the feature dimension
/// workable; non-word features are always present for their active family.
#[derive(Debug, Clone)]
pub struct ExtractorConfig {
    pub ngram_order: NgramOrder,
    pub pos_colored: bool,
    pub min_count: usize,
    pub families: FeatureFamilies,
    pub column_norm: ColumnNorm,
    pub quantifier_lexicon: HashSet<String>,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            ngram_order: NgramOrder::UnigramBigram,
            pos_colored: false,
            min_count: 2,
            families: FeatureFamilies::default(),
            column_norm: ColumnNorm::UnitL2,
            quantifier_lexicon: HashSet::new(),
        }
    }
}

/// Ordered feature list with a reverse index. Order is the sorted canonical
/// descriptor order, so two runs over the same data agree byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    entries: Vec<Feature>,
    keys: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_features(features: impl IntoIterator<Item = Feature>) -> Self {
        let sorted: BTreeMap<String, Feature> = features
            .into_iter()
            .map(|f| (f.to_string(), f))
            .collect();
        let mut entries = Vec::with_capacity(sorted.len());
        let mut keys = Vec::with_capacity(sorted.len());
        let mut index = HashMap::with_capacity(sorted.len());
        for (i, (key, feature)) in sorted.into_iter().enumerate() {
            index.insert(key.clone(), i);
            keys.push(key);
            entries.push(feature);
        }
        Vocabulary {
            entries,
            keys,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Feature] {
        &self.entries
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn row_of(&self, feature: &Feature) -> Option<usize> {
        self.index.get(&feature.to_string()).copied()
    }
}

/// Partition of the vocabulary rows used by the group penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGroups {
    group_of: Vec<usize>,
    groups: Vec<Vec<usize>>,
    keys: Vec<String>,
}

impl FeatureGroups {
    /// Builds from per-row group keys, checking the partition property.
    pub fn from_keys(row_keys: Vec<String>) -> Self {
        let mut by_key: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (row, key) in row_keys.iter().enumerate() {
            by_key.entry(key.clone()).or_default().push(row);
        }
        let mut group_of = vec![usize::MAX; row_keys.len()];
        let mut groups = Vec::with_capacity(by_key.len());
        let mut keys = Vec::with_capacity(by_key.len());
        for (gid, (key, rows)) in by_key.into_iter().enumerate() {
            for &row in &rows {
                group_of[row] = gid;
            }
            groups.push(rows);
            keys.push(key);
        }
        let covered: usize = groups.iter().map(Vec::len).sum();
        assert_eq!(covered, group_of.len(), "groups must partition the rows");
        assert!(group_of.iter().all(|&g| g != usize::MAX));
        FeatureGroups {
            group_of,
            groups,
            keys,
        }
    }

    /// One group per row.
    pub fn singletons(m: usize) -> Self {
        FeatureGroups {
            group_of: (0..m).collect(),
            groups: (0..m).map(|i| vec![i]).collect(),
            keys: (0..m).map(|i| format!("row:{i}")).collect(),
        }
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn row_count(&self) -> usize {
        self.group_of.len()
    }

    pub fn group_of(&self, row: usize) -> usize {
        self.group_of[row]
    }

    pub fn rows_of(&self, group: usize) -> &[usize] {
        &self.groups[group]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }
}

/// Word features group by the part-of-speech label of their first token
/// when pos-colored, otherwise by n-gram order; every other feature kind is
/// its own singleton group.
pub fn assign_groups(vocab: &Vocabulary) -> FeatureGroups {
    let keys = vocab
        .entries()
        .iter()
        .map(|f| match f {
            Feature::Word { tokens, pos } => match pos {
                Some(labels) => format!("word:pos:{}", labels[0]),
                None => format!("word:order:{}", tokens.len()),
            },
            other => format!("single:{other}"),
        })
        .collect();
    FeatureGroups::from_keys(keys)
}

/// Sparse feature matrix: rows are vocabulary entries, columns are tweets in
/// the caller-supplied (canonical) record order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: SparseMatrix,
    ids: Vec<String>,
    column_norm: ColumnNorm,
}

impl FeatureMatrix {
    pub fn from_parts(data: SparseMatrix, ids: Vec<String>, column_norm: ColumnNorm) -> Self {
        assert_eq!(data.ncols(), ids.len());
        FeatureMatrix {
            data,
            ids,
            column_norm,
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.data
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn tweet_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn column_norm(&self) -> ColumnNorm {
        self.column_norm
    }

    /// Keeps the chosen columns (e.g. a train split), in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            data: self.data.select_cols(cols),
            ids: cols.iter().map(|&j| self.ids[j].clone()).collect(),
            column_norm: self.column_norm,
        }
    }
}

fn record_features(
    record: &TweetRecord,
    cfg: &ExtractorConfig,
) -> Result<BTreeMap<Feature, f64>> {
    let mut counts = BTreeMap::new();
    if cfg.families.words {
        counts = extract_word_features(record, cfg.ngram_order, cfg.pos_colored)?;
    }
    if cfg.families.tags {
        let t = extract_tag_ner_length(record);
        counts.insert(Feature::TagPresence, f64::from(t.tag_presence));
        counts.insert(Feature::TagCount, f64::from(t.tag_count));
    }
    if cfg.families.morphology {
        let m = extract_morphological(record, &cfg.quantifier_lexicon);
        for kind in MorphKind::ALL {
            counts.insert(Feature::Morph(kind), f64::from(m.get(kind)));
        }
    }
    if cfg.families.entities {
        let t = extract_tag_ner_length(record);
        for kind in EntityKind::ALL {
            counts.insert(Feature::Ner(kind), f64::from(t.ner_count(kind)));
        }
    }
    if cfg.families.length {
        let t = extract_tag_ner_length(record);
        counts.insert(Feature::Length, f64::from(t.length));
    }
    Ok(counts)
}

/// Builds the feature matrix. With `vocab` absent the vocabulary is learned
/// from the records (training); with it present, out-of-vocabulary features
/// are dropped (inference). Column normalization is applied last.
pub fn build_matrix(
    records: &[TweetRecord],
    vocab: Option<&Vocabulary>,
    cfg: &ExtractorConfig,
) -> Result<(FeatureMatrix, Vocabulary)> {
    let per_record: Vec<BTreeMap<Feature, f64>> = records
        .iter()
        .map(|r| record_features(r, cfg))
        .collect::<Result<_>>()?;

    let vocab = match vocab {
        Some(v) => v.clone(),
        None => {
            let mut word_totals: BTreeMap<Feature, f64> = BTreeMap::new();
            let mut fixed: HashSet<Feature> = HashSet::new();
            for counts in &per_record {
                for (feature, &count) in counts {
                    match feature {
                        Feature::Word { .. } => {
                            *word_totals.entry(feature.clone()).or_insert(0.0) += count;
                        }
                        other => {
                            fixed.insert(other.clone());
                        }
                    }
                }
            }
            let kept = word_totals
                .into_iter()
                .filter(|(_, total)| *total >= cfg.min_count as f64)
                .map(|(f, _)| f)
                .chain(fixed);
            Vocabulary::from_features(kept)
        }
    };

    let mut triplets = Vec::new();
    for (col, counts) in per_record.iter().enumerate() {
        for (feature, &count) in counts {
            if count == 0.0 {
                continue;
            }
            if let Some(row) = vocab.row_of(feature) {
                triplets.push((row, col, count));
            }
        }
    }
    let mut data = SparseMatrix::from_triplets(vocab.len(), records.len(), triplets);
    if cfg.column_norm == ColumnNorm::UnitL2 {
        data.l2_normalize_columns();
    }
    let ids = records.iter().map(|r| r.tweet_id.clone()).collect();
    Ok((
        FeatureMatrix::from_parts(data, ids, cfg.column_norm),
        vocab,
    ))
}
