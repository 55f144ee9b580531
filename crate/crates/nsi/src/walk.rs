//! Random walk over the tweet graph: transition matrix with teleportation
//! damping and the stationary distribution computed by power iteration.
//!
//! Real interaction graphs are disconnected, so the walk is damped: rows
//! with no outgoing weight are replaced by the uniform row, and the whole
//! matrix is mixed with the uniform matrix. Any damping below one makes the
//! chain irreducible and aperiodic, which guarantees one strictly positive
//! stationary distribution.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::graph::TweetGraph;
use crate::linalg::max_abs_diff;

/// Row-stochastic transition matrix of the damped walk.
///
/// `structural_edges` keeps the ordered pairs carried by the tweet graph
/// itself (before dangling-row replacement and teleportation); the pairwise
/// smoothness sum runs over exactly these pairs.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    p: Array2<f64>,
    damping: f64,
    structural_edges: Vec<(usize, usize)>,
}

impl TransitionMatrix {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn len(&self) -> usize {
        self.p.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.p.nrows() == 0
    }

    /// Ordered `(u, v)` pairs with positive weight in the underlying graph.
    pub fn structural_edges(&self) -> &[(usize, usize)] {
        &self.structural_edges
    }
}

/// Stationary distribution of the walk: positive entries summing to one.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pi: Array1<f64>,
    residual: f64,
}

impl StationaryDistribution {
    #[cfg(test)]
    pub(crate) fn from_raw(pi: Array1<f64>, residual: f64) -> Self {
        Self { pi, residual }
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.pi
    }

    /// `‖πᵀP − πᵀ‖∞` at the returned vector.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }
}

/// Builds the damped transition matrix from a tweet graph.
///
/// Base rows divide each adjacency row by its out-degree; zero-degree rows
/// become uniform. The result is `damping * base + (1 - damping) * uniform`,
/// so every row sums to one.
pub fn transition_matrix(h: &TweetGraph, damping: f64) -> Result<TransitionMatrix> {
    transition_from_adjacency(h.adjacency(), damping)
}

/// Same construction for an arbitrary nonnegative (possibly asymmetric)
/// weight matrix. The tweet graph is symmetric by construction, but the walk
/// and the Laplacian are defined for any directed graph.
pub fn transition_from_adjacency(a: &Array2<f64>, damping: f64) -> Result<TransitionMatrix> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "adjacency must be square, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidDamping(damping));
    }
    let uniform = 1.0 / n as f64;
    let teleport = (1.0 - damping) * uniform;
    let mut p = Array2::<f64>::zeros((n, n));
    let mut structural_edges = Vec::new();
    for u in 0..n {
        let degree: f64 = a.row(u).sum();
        if degree > 0.0 {
            for v in 0..n {
                let w = a[[u, v]];
                if w > 0.0 {
                    structural_edges.push((u, v));
                }
                p[[u, v]] = damping * w / degree + teleport;
            }
        } else {
            for v in 0..n {
                p[[u, v]] = damping * uniform + teleport;
            }
        }
    }
    Ok(TransitionMatrix {
        p,
        damping,
        structural_edges,
    })
}

/// Power iteration from the uniform vector until `‖πᵀP − πᵀ‖∞ < tol`.
///
/// Iterates the half-lazy map `π ← (π + Pᵀπ) / 2`, which has the same fixed
/// points as `P` but also converges on periodic chains (cycles, bipartite
/// graphs) where the plain iteration oscillates. The residual is always
/// measured against the original `P`.
pub fn stationary_distribution(
    p: &TransitionMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryDistribution> {
    if !(tol > 0.0) {
        return Err(Error::DegenerateConfig(format!(
            "stationary tolerance must be positive, got {tol}"
        )));
    }
    let n = p.len();
    let pt = p.matrix().t();
    let mut x = Array1::from_elem(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let y = pt.dot(&x);
        residual = max_abs_diff(&y, &x);
        if residual < tol {
            return Ok(StationaryDistribution { pi: x, residual });
        }
        x = (&x + &y) * 0.5;
        let sum = x.sum();
        x /= sum;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{line_graph, UserGraph};
    use ndarray::array;

    fn tweet_graph(adj: Array2<f64>) -> TweetGraph {
        let ids = (0..adj.nrows()).map(|i| format!("t{i:02}")).collect();
        TweetGraph::from_adjacency(ids, adj).unwrap()
    }

    #[test]
    fn unit_out_edges_split_evenly() {
        let h = tweet_graph(array![
            [0.0, 1.0, 1.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0]
        ]);
        let p = transition_matrix(&h, 1.0).unwrap();
        assert_eq!(p.matrix()[[0, 1]], 0.5);
        assert_eq!(p.matrix()[[0, 2]], 0.5);
    }

    #[test]
    fn dangling_row_becomes_uniform() {
        let h = tweet_graph(array![
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0]
        ]);
        let p = transition_matrix(&h, 1.0).unwrap();
        for v in 0..3 {
            assert!((p.matrix()[[2, v]] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn damping_mixes_with_uniform() {
        let h = tweet_graph(array![[0.0, 1.0], [1.0, 0.0]]);
        let p = transition_matrix(&h, 0.85).unwrap();
        assert!((p.matrix()[[0, 1]] - 0.925).abs() < 1e-15);
        assert!((p.matrix()[[0, 0]] - 0.075).abs() < 1e-15);
    }

    #[test]
    fn rows_sum_to_one_on_random_graphs_with_dangling_nodes() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..20);
            let mut adj = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.3) {
                        let w = rng.gen_range(0.1..3.0);
                        adj[[i, j]] = w;
                        adj[[j, i]] = w;
                    }
                }
            }
            let h = tweet_graph(adj);
            let damping = rng.gen_range(0.1..=1.0);
            let p = transition_matrix(&h, damping).unwrap();
            for u in 0..n {
                assert!((p.matrix().row(u).sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_cycle_is_uniform() {
        let h = tweet_graph(array![[0.0, 1.0], [1.0, 0.0]]);
        let p = transition_matrix(&h, 1.0).unwrap();
        let pi = stationary_distribution(&p, 1e-12, 1000).unwrap();
        assert!((pi.values()[0] - 0.5).abs() < 1e-12);
        assert!((pi.values()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn triangle_is_uniform() {
        let g = {
            let mut g = UserGraph::new();
            g.add_edge("a", "b", "t1", 1.0).unwrap();
            g.add_edge("b", "c", "t2", 1.0).unwrap();
            g.add_edge("c", "a", "t3", 1.0).unwrap();
            g
        };
        let h = line_graph(&g).unwrap();
        let p = transition_matrix(&h, 1.0).unwrap();
        let pi = stationary_distribution(&p, 1e-12, 1000).unwrap();
        for v in pi.values() {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_is_below_tolerance() {
        let h = tweet_graph(array![
            [0.0, 2.0, 0.0],
            [2.0, 0.0, 1.0],
            [0.0, 1.0, 0.0]
        ]);
        let p = transition_matrix(&h, 0.85).unwrap();
        let pi = stationary_distribution(&p, 1e-12, 100_000).unwrap();
        assert!(pi.residual() < 1e-12);
        assert!((pi.values().sum() - 1.0).abs() < 1e-12);
        assert!(pi.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let h = tweet_graph(array![
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 0.0]
        ]);
        let p = transition_matrix(&h, 0.85).unwrap();
        let err = stationary_distribution(&p, 1e-15, 2).unwrap_err();
        match err {
            Error::NoConvergence { iterations, residual, .. } => {
                assert_eq!(iterations, 2);
                assert!(residual.is_finite());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn permutation_equivariant() {
        // relabeling tweets permutes pi the same way
        let adj = array![
            [0.0, 2.0, 1.0, 0.0],
            [2.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0]
        ];
        let h = tweet_graph(adj.clone());
        let p = transition_matrix(&h, 0.85).unwrap();
        let pi = stationary_distribution(&p, 1e-13, 100_000).unwrap();

        // permute nodes with the map 0->3, 1->2, 2->1, 3->0
        let perm = [3usize, 2, 1, 0];
        let mut adj_p = Array2::<f64>::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                adj_p[[perm[i], perm[j]]] = adj[[i, j]];
            }
        }
        let hp = tweet_graph(adj_p);
        let pp = transition_matrix(&hp, 0.85).unwrap();
        let pip = stationary_distribution(&pp, 1e-13, 100_000).unwrap();
        for i in 0..4 {
            assert!((pi.values()[i] - pip.values()[perm[i]]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_damping() {
        let h = tweet_graph(array![[0.0, 1.0], [1.0, 0.0]]);
        assert!(matches!(
            transition_matrix(&h, 0.0),
            Err(Error::InvalidDamping(_))
        ));
        assert!(matches!(
            transition_matrix(&h, 1.5),
            Err(Error::InvalidDamping(_))
        ));
    }
}
