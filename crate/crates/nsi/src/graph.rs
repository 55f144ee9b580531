//! User-interaction graph and its conversion to a tweet-tweet graph.
//!
//! Users form a directed multigraph: every reply/retweet is one edge, and
//! every edge carries the id of the tweet it transports. Classifying tweets
//! therefore means classifying *edges*, which we turn back into a node
//! problem by taking the line graph: one node per tweet, a link whenever two
//! interaction edges touch a common user (direction ignored).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use ndarray::Array2;

use crate::error::{Error, Result};

/// One interaction: `src` replied to / retweeted `dst`, creating `tweet`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserEdge {
    pub src: String,
    pub dst: String,
    pub tweet: String,
    pub weight: f64,
}

/// Directed multigraph of user interactions. Tweet ids are unique across
/// edges and every endpoint is tracked in the node set.
#[derive(Debug, Clone, Default)]
pub struct UserGraph {
    nodes: BTreeSet<String>,
    edges: Vec<UserEdge>,
    tweet_ids: HashSet<String>,
}

impl UserGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an isolated user.
    pub fn add_node(&mut self, user: &str) {
        self.nodes.insert(user.to_string());
    }

    /// Adds an interaction edge; endpoints are inserted into the node set.
    pub fn add_edge(&mut self, src: &str, dst: &str, tweet: &str, weight: f64) -> Result<()> {
        if weight < 0.0 {
            return Err(Error::NegativeWeight {
                tweet: tweet.to_string(),
                weight,
            });
        }
        if !self.tweet_ids.insert(tweet.to_string()) {
            return Err(Error::DuplicateTweetId(tweet.to_string()));
        }
        self.nodes.insert(src.to_string());
        self.nodes.insert(dst.to_string());
        self.edges.push(UserEdge {
            src: src.to_string(),
            dst: dst.to_string(),
            tweet: tweet.to_string(),
            weight,
        });
        Ok(())
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|s| s.as_str())
    }

    pub fn edges(&self) -> &[UserEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Graph over tweets. Nodes are tweet ids in canonical (sorted) order; that
/// order is the shared index for feature columns, label rows and Laplacian
/// rows. The adjacency is symmetric, nonnegative, zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TweetGraph {
    ids: Vec<String>,
    adjacency: Array2<f64>,
}

impl TweetGraph {
    /// Wraps an explicit adjacency matrix. Rejects asymmetry, negative
    /// weights and nonzero diagonal entries.
    pub fn from_adjacency(ids: Vec<String>, adjacency: Array2<f64>) -> Result<Self> {
        let n = ids.len();
        if adjacency.nrows() != n || adjacency.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "tweet graph: {} ids vs {}x{} adjacency",
                n,
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateTweetId(id.clone()));
            }
        }
        for i in 0..n {
            if adjacency[[i, i]] != 0.0 {
                return Err(Error::DimensionMismatch(format!(
                    "nonzero diagonal at tweet `{}`",
                    ids[i]
                )));
            }
            for j in 0..n {
                let w = adjacency[[i, j]];
                if w < 0.0 {
                    return Err(Error::NegativeWeight {
                        tweet: ids[i].clone(),
                        weight: w,
                    });
                }
                if (w - adjacency[[j, i]]).abs() > 1e-12 {
                    return Err(Error::DimensionMismatch(format!(
                        "asymmetric adjacency between `{}` and `{}`",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(TweetGraph { ids, adjacency })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Tweet ids in canonical order.
    pub fn node_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&w| w > 0.0).count() / 2
    }

    /// Index of a tweet id, if present.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        // canonical order is sorted, so binary search applies
        self.ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok()
    }

    /// Induced subgraph on the given node indices, keeping their order.
    pub fn subgraph(&self, indices: &[usize]) -> TweetGraph {
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        let k = indices.len();
        let adjacency = Array2::from_shape_fn((k, k), |(a, b)| {
            self.adjacency[[indices[a], indices[b]]]
        });
        TweetGraph { ids, adjacency }
    }

    /// True when the graph is connected in the undirected sense and has no
    /// isolated node. An empty graph counts as disconnected.
    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if !seen[v] && self.adjacency[[u, v]] > 0.0 {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Number of connected components (undirected sense).
    pub fn component_count(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    if !seen[v] && self.adjacency[[u, v]] > 0.0 {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }
}

/// Converts the user graph into its tweet graph: one node per interaction
/// edge, nodes linked exactly when their edges share an endpoint on either
/// side, direction ignored. Node order is the sorted tweet-id order.
pub fn line_graph(g: &UserGraph) -> Result<TweetGraph> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut ids: Vec<String> = g.edges().iter().map(|e| e.tweet.clone()).collect();
    ids.sort_unstable();
    let index: HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let n = ids.len();
    let mut adjacency = Array2::<f64>::zeros((n, n));
    // Edges incident to a user form a clique among the tweets they carry.
    let mut incident: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for e in g.edges() {
        let t = index[e.tweet.as_str()];
        incident.entry(e.src.as_str()).or_default().push(t);
        if e.dst != e.src {
            incident.entry(e.dst.as_str()).or_default().push(t);
        }
    }
    for tweets in incident.values() {
        for (a, &ta) in tweets.iter().enumerate() {
            for &tb in &tweets[a + 1..] {
                if ta != tb {
                    adjacency[[ta, tb]] = 1.0;
                    adjacency[[tb, ta]] = 1.0;
                }
            }
        }
    }
    Ok(TweetGraph { ids, adjacency })
}
