//! Synthetic interaction data with planted community structure.
//!
//! Users live in communities; interaction edges appear with a higher
//! probability inside a community than across, and every edge becomes one
//! tweet. Positive labels concentrate in the lowest-index communities, so
//! connected tweets tend to share labels, which is exactly the mechanism
//! the graph penalty is supposed to exploit. Tweet text comes from
//! class-conditional word distributions whose overlap is controlled by
//! `content_signal`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::TweetRecord;
use crate::graph::{line_graph, UserGraph};
use crate::solver::Class;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_users: usize,
    /// Target tweet (edge) count; pair probabilities are scaled so the
    /// expected count hits this while keeping `p_intra : p_inter` fixed.
    pub n_tweets: usize,
    pub n_communities: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    pub positive_rate: f64,
    /// 0 makes the class word distributions identical, 1 makes their
    /// supports disjoint.
    pub content_signal: f64,
    pub vocab_size: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_users: 400,
            n_tweets: 2000,
            n_communities: 2,
            p_intra: 0.05,
            p_inter: 0.005,
            positive_rate: 0.099,
            content_signal: 0.3,
            vocab_size: 400,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_prob = |p: f64| (0.0..=1.0).contains(&p);
        if !ok_prob(self.p_intra) || !ok_prob(self.p_inter) {
            return Err(Error::DegenerateConfig(
                "edge probabilities must lie in [0, 1]".into(),
            ));
        }
        // equal probabilities are allowed as the no-structure control case
        if self.p_intra < self.p_inter {
            return Err(Error::DegenerateConfig(
                "p_intra must be at least p_inter".into(),
            ));
        }
        if !(self.positive_rate > 0.0 && self.positive_rate < 1.0) {
            return Err(Error::DegenerateConfig(
                "positive_rate must lie in (0, 1)".into(),
            ));
        }
        if !ok_prob(self.content_signal) {
            return Err(Error::DegenerateConfig(
                "content_signal must lie in [0, 1]".into(),
            ));
        }
        if self.n_users < 2 || self.n_communities == 0 || self.n_communities > self.n_users {
            return Err(Error::DegenerateConfig(
                "need at least two users and a usable community count".into(),
            ));
        }
        if self.n_tweets == 0 {
            return Err(Error::DegenerateConfig("n_tweets must be positive".into()));
        }
        if self.vocab_size < 4 {
            return Err(Error::DegenerateConfig("vocab_size must be at least 4".into()));
        }
        Ok(())
    }
}

/// Summary of a generated data set.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthStats {
    pub n_edges: usize,
    pub positive_rate: f64,
    /// Mean tweet-graph degree: how many other tweets each tweet touches.
    pub avg_interactions_per_tweet: f64,
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub user_graph: UserGraph,
    pub records: Vec<TweetRecord>,
    pub labels: Vec<Class>,
    pub stats: SynthStats,
}

fn word(i: usize) -> String {
    // three lowercase letters; no digits, so number counts stay honest
    let a = i / 676;
    let b = (i / 26) % 26;
    let c = i % 26;
    format!(
        "w{}{}{}",
        (b'a' + a as u8) as char,
        (b'a' + b as u8) as char,
        (b'a' + c as u8) as char
    )
}

/// Target positive share inside the positive community. Well below one:
/// the community is a noisy prior, not a giveaway, so connected tweets
/// correlate in label without the adjacency rows alone solving the task.
const ALIGNMENT: f64 = 0.4;

/// Community sizes. The first community is shrunk until its expected share
/// of tweets is about `rate / ALIGNMENT`, so that filling it with positives
/// gives strong label-community alignment at any positive rate; the rest of
/// the users split evenly. Without community structure (equal edge
/// probabilities) all communities get equal sizes.
fn community_sizes(config: &SynthConfig) -> Vec<usize> {
    let u = config.n_users;
    let k = config.n_communities;
    let equal = |first: usize| -> Vec<usize> {
        let rest = u - first;
        let mut sizes = vec![first];
        for c in 0..k - 1 {
            sizes.push(rest / (k - 1) + usize::from(c < rest % (k - 1)));
        }
        sizes
    };
    if k == 1 {
        return vec![u];
    }
    if config.p_intra == config.p_inter {
        let mut sizes = equal(u / k);
        let short: usize = u - sizes.iter().sum::<usize>();
        sizes[0] += short;
        return sizes;
    }
    let target = (config.positive_rate / ALIGNMENT).min(1.0 / k as f64);
    let mut best = (f64::INFINITY, 1usize);
    for first in 1..=u / k {
        let sizes = equal(first);
        let shares = tweet_shares(&sizes, u, config.p_intra, config.p_inter);
        let gap = (shares[0] - target).abs();
        if gap < best.0 {
            best = (gap, first);
        }
    }
    equal(best.1)
}

/// Expected fraction of tweets sourced in each community.
fn tweet_shares(sizes: &[usize], n_users: usize, p_intra: f64, p_inter: f64) -> Vec<f64> {
    let totals: Vec<f64> = sizes
        .iter()
        .map(|&s| {
            let s = s as f64;
            p_intra * s * (s - 1.0) + p_inter * s * (n_users as f64 - s)
        })
        .collect();
    let sum: f64 = totals.iter().sum();
    totals.iter().map(|t| t / sum).collect()
}

/// Positive propensity per community: the requested positive mass is poured
/// into communities in index order, so low-index communities carry the
/// positives and connected tweets tend to share labels. With no community
/// structure the labels are independent of the graph.
fn community_propensities(rate: f64, shares: &[f64], structured: bool) -> Vec<f64> {
    if !structured {
        return vec![rate; shares.len()];
    }
    let mut remaining = rate;
    shares
        .iter()
        .map(|&share| {
            let theta = if share > 0.0 {
                (remaining / share).min(1.0)
            } else {
                0.0
            };
            remaining = (remaining - theta * share).max(0.0);
            theta
        })
        .collect()
}

pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sizes = community_sizes(config);
    let community: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat(c).take(s))
        .collect();

    // scale pair probabilities so the expected edge count hits the target
    let mut n_intra = 0usize;
    let mut n_inter = 0usize;
    for u in 0..config.n_users {
        for v in 0..config.n_users {
            if u == v {
                continue;
            }
            if community[u] == community[v] {
                n_intra += 1;
            } else {
                n_inter += 1;
            }
        }
    }
    let expected = config.p_intra * n_intra as f64 + config.p_inter * n_inter as f64;
    if expected <= 0.0 {
        return Err(Error::DegenerateConfig(
            "configuration expects zero edges".into(),
        ));
    }
    let scale = config.n_tweets as f64 / expected;
    if scale * config.p_intra > 1.0 {
        return Err(Error::DegenerateConfig(format!(
            "target of {} tweets is unreachable with {} users",
            config.n_tweets, config.n_users
        )));
    }

    let shares = tweet_shares(&sizes, config.n_users, config.p_intra, config.p_inter);
    let propensities = community_propensities(
        config.positive_rate,
        &shares,
        config.p_intra > config.p_inter,
    );
    // class word distributions: mixture of a shared uniform and a
    // class-specific half of the vocabulary, mixed by content_signal
    let half = config.vocab_size / 2;

    let mut user_graph = UserGraph::new();
    let mut records = Vec::new();
    let mut labels = Vec::new();
    let mut tweet = 0usize;
    for u in 0..config.n_users {
        for v in 0..config.n_users {
            if u == v {
                continue;
            }
            let p = if community[u] == community[v] {
                scale * config.p_intra
            } else {
                scale * config.p_inter
            };
            if !rng.gen_bool(p) {
                continue;
            }
            let id = format!("t{tweet:06}");
            tweet += 1;
            user_graph
                .add_edge(&format!("u{u:04}"), &format!("u{v:04}"), &id, 1.0)
                .expect("generated tweet ids are unique");

            // the tweet inherits the source user's community
            let label = if rng.gen_bool(propensities[community[u]]) {
                Class::Positive
            } else {
                Class::Negative
            };
            let length = rng.gen_range(5..=12);
            let words: Vec<String> = (0..length)
                .map(|_| {
                    let idx = if rng.gen_bool(config.content_signal) {
                        match label {
                            Class::Positive => rng.gen_range(0..half),
                            Class::Negative => rng.gen_range(half..config.vocab_size),
                        }
                    } else {
                        rng.gen_range(0..config.vocab_size)
                    };
                    word(idx)
                })
                .collect();
            records.push(TweetRecord::new(&id, &words.join(" ")));
            labels.push(label);
        }
    }
    if records.is_empty() {
        return Err(Error::DegenerateConfig(
            "no edges were generated; raise the probabilities or the user count".into(),
        ));
    }

    let h = line_graph(&user_graph)?;
    let degree_sum: f64 = h
        .adjacency()
        .rows()
        .into_iter()
        .map(|row| row.iter().filter(|&&w| w > 0.0).count() as f64)
        .sum();
    let positives = labels.iter().filter(|&&l| l == Class::Positive).count();
    let stats = SynthStats {
        n_edges: records.len(),
        positive_rate: positives as f64 / records.len() as f64,
        avg_interactions_per_tweet: degree_sum / records.len() as f64,
    };
    Ok(SynthData {
        user_graph,
        records,
        labels,
        stats,
    })
}
