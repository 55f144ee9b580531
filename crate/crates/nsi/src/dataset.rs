//! Glue between records and the tweet graph: one canonical tweet order
//! shared by feature columns, label rows and Laplacian rows.

use crate::error::{Error, Result};
use crate::features::TweetRecord;
use crate::graph::{line_graph, TweetGraph, UserGraph};
use crate::solver::Class;

/// A full data set: the tweet graph plus records and optional labels, all
/// aligned to the graph's canonical (sorted tweet-id) order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: TweetGraph,
    pub records: Vec<TweetRecord>,
    pub labels: Vec<Option<Class>>,
}

impl Dataset {
    /// Builds the tweet graph from the interaction edges, sorts the records
    /// into canonical order and verifies that records and graph nodes are
    /// the same tweets.
    pub fn assemble(
        user_graph: &UserGraph,
        records: Vec<TweetRecord>,
        labels: Vec<Option<Class>>,
    ) -> Result<Dataset> {
        if records.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} records with {} labels",
                records.len(),
                labels.len()
            )));
        }
        let graph = line_graph(user_graph)?;
        let mut paired: Vec<(TweetRecord, Option<Class>)> =
            records.into_iter().zip(labels).collect();
        paired.sort_by(|a, b| a.0.tweet_id.cmp(&b.0.tweet_id));
        let expected = graph.node_ids();
        for (position, (record, _)) in paired.iter().enumerate() {
            let want = expected.get(position).map(String::as_str).unwrap_or("<none>");
            if record.tweet_id != want {
                return Err(Error::RecordOrderMismatch {
                    position,
                    expected: want.to_string(),
                    found: record.tweet_id.clone(),
                });
            }
        }
        if paired.len() != expected.len() {
            let position = paired.len();
            return Err(Error::RecordOrderMismatch {
                position,
                expected: expected[position].clone(),
                found: "<none>".to_string(),
            });
        }
        let (records, labels) = paired.into_iter().unzip();
        Ok(Dataset {
            graph,
            records,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Indices of records carrying a label, in canonical order.
    pub fn labeled_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|_| i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user_graph() -> UserGraph {
        let mut g = UserGraph::new();
        g.add_edge("a", "b", "t1", 1.0).unwrap();
        g.add_edge("b", "c", "t2", 1.0).unwrap();
        g
    }

    #[test]
    fn records_are_sorted_into_canonical_order() {
        let records = vec![TweetRecord::new("t2", "world"), TweetRecord::new("t1", "hello")];
        let labels = vec![Some(Class::Negative), Some(Class::Positive)];
        let ds = Dataset::assemble(&user_graph(), records, labels).unwrap();
        assert_eq!(ds.records[0].tweet_id, "t1");
        assert_eq!(ds.labels[0], Some(Class::Positive));
        assert_eq!(ds.graph.node_ids(), ["t1", "t2"]);
    }

    #[test]
    fn mismatching_id_is_named() {
        let records = vec![TweetRecord::new("t1", "hello"), TweetRecord::new("t9", "oops")];
        let labels = vec![None, None];
        let err = Dataset::assemble(&user_graph(), records, labels).unwrap_err();
        match err {
            Error::RecordOrderMismatch {
                position, expected, found,
            } => {
                assert_eq!(position, 1);
                assert_eq!(expected, "t2");
                assert_eq!(found, "t9");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_record_is_caught() {
        let records = vec![TweetRecord::new("t1", "hello")];
        let labels = vec![None];
        assert!(Dataset::assemble(&user_graph(), records, labels).is_err());
    }

    #[test]
    fn labeled_indices_skip_unknowns() {
        let records = vec![TweetRecord::new("t1", "a"), TweetRecord::new("t2", "b")];
        let labels = vec![None, Some(Class::Positive)];
        let ds = Dataset::assemble(&user_graph(), records, labels).unwrap();
        assert_eq!(ds.labeled_indices(), vec![1]);
    }
}
