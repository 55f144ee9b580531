//! Directed-graph Laplacian `L = I − Θ` built from the damped walk, where
//! `Θ = (Π^{1/2} P Π^{−1/2} + Π^{−1/2} Pᵀ Π^{1/2}) / 2` and `Π` is the
//! diagonal matrix of the stationary distribution.
//!
//! `L` is symmetric by construction and positive semidefinite; the solver
//! uses the quadratic form `tr(ŶᵀLŶ)`, which equals the pairwise smoothness
//! sum computed by [`smoothness`] whenever the walk has no teleportation and
//! no dangling rows.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::walk::{StationaryDistribution, TransitionMatrix};

/// The Laplacian and the symmetrized operator it came from.
#[derive(Debug, Clone)]
pub struct GraphLaplacian {
    l: Array2<f64>,
    theta: Array2<f64>,
}

impl GraphLaplacian {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.l
    }

    pub fn theta(&self) -> &Array2<f64> {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.l.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.l.nrows() == 0
    }

    /// Wraps a precomputed symmetric PSD matrix (tests, file loading).
    pub fn from_matrix(l: Array2<f64>) -> Result<Self> {
        if l.nrows() != l.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "laplacian must be square, got {}x{}",
                l.nrows(),
                l.ncols()
            )));
        }
        let n = l.nrows();
        let theta = Array2::from_shape_fn((n, n), |(i, j)| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - l[[i, j]]
        });
        Ok(GraphLaplacian { l, theta })
    }
}

/// Assembles `L = I − Θ`. Every stationary entry must be strictly positive,
/// which damping below one guarantees; a zero entry means the walk was built
/// with damping one on a graph that does not support it.
pub fn laplacian(p: &TransitionMatrix, pi: &StationaryDistribution) -> Result<GraphLaplacian> {
    let n = p.len();
    if pi.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "pi has {} entries for a {}-node walk",
            pi.len(),
            n
        )));
    }
    for (index, &value) in pi.values().iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::NonPositiveStationary { index, value });
        }
    }
    let sqrt_pi: Vec<f64> = pi.values().iter().map(|v| v.sqrt()).collect();
    let pm = p.matrix();
    let mut theta = Array2::<f64>::zeros((n, n));
    for u in 0..n {
        for v in u..n {
            // (√(π_u/π_v) P(u,v) + √(π_v/π_u) P(v,u)) / 2, mirrored exactly
            let value = 0.5
                * (sqrt_pi[u] / sqrt_pi[v] * pm[[u, v]]
                    + sqrt_pi[v] / sqrt_pi[u] * pm[[v, u]]);
            theta[[u, v]] = value;
            theta[[v, u]] = value;
        }
    }
    let mut l = -&theta;
    for u in 0..n {
        l[[u, u]] += 1.0;
    }
    Ok(GraphLaplacian { l, theta })
}

/// Pairwise smoothness of a score matrix over the structural edges of the
/// walk:
///
/// `½ Σ_{(u,v)} π(u) P(u,v) ‖Ŷ_u − Ŷ_v‖²`
///
/// This is the independent route to the quadratic form: for a walk with
/// damping one and no dangling rows, `smoothness(Ŷ)` equals
/// `tr(FᵀLF)` with `F = Π^{1/2} Ŷ`. An edgeless graph has no structural
/// edges, so the sum is empty and the result is zero.
pub fn smoothness(
    y_hat: &Array2<f64>,
    p: &TransitionMatrix,
    pi: &StationaryDistribution,
) -> f64 {
    let pm = p.matrix();
    let values = pi.values();
    let mut total = 0.0;
    for &(u, v) in p.structural_edges() {
        let mut diff_sq = 0.0;
        for k in 0..y_hat.ncols() {
            let d = y_hat[[u, k]] - y_hat[[v, k]];
            diff_sq += d * d;
        }
        total += values[u] * pm[[u, v]] * diff_sq;
    }
    0.5 * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{asymmetry, trace_dot};
    use crate::walk::{stationary_distribution, transition_from_adjacency};
    use ndarray::{array, Array1, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn walk(adj: Array2<f64>, damping: f64) -> (TransitionMatrix, StationaryDistribution) {
        let p = transition_from_adjacency(&adj, damping).unwrap();
        let pi = stationary_distribution(&p, 1e-14, 1_000_000).unwrap();
        (p, pi)
    }

    // strongly connected directed graph: a cycle plus random extra arcs
    fn random_strongly_connected(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
        let mut adj = Array2::<f64>::zeros((n, n));
        for u in 0..n {
            adj[[u, (u + 1) % n]] = 1.0;
        }
        for _ in 0..n {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                adj[[u, v]] = rng.gen_range(0.5..2.0);
            }
        }
        adj
    }

    #[test]
    fn single_undirected_edge() {
        let (p, pi) = walk(array![[0.0, 1.0], [1.0, 0.0]], 1.0);
        let lap = laplacian(&p, &pi).unwrap();
        assert_eq!(lap.theta(), &array![[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(lap.matrix(), &array![[1.0, -1.0], [-1.0, 1.0]]);
        // eigenvalues of [[1,-1],[-1,1]] are {0, 2}
        let l = lap.matrix();
        let trace = l[[0, 0]] + l[[1, 1]];
        let det = l[[0, 0]] * l[[1, 1]] - l[[0, 1]] * l[[1, 0]];
        assert!((trace - 2.0).abs() < 1e-12);
        assert!(det.abs() < 1e-12);
    }

    #[test]
    fn exactly_symmetric_by_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(2..12);
            let mut adj = Array2::<f64>::zeros((n, n));
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(0.4) {
                        adj[[u, v]] = rng.gen_range(0.1..2.0);
                    }
                }
            }
            let (p, pi) = walk(adj, 0.85);
            let lap = laplacian(&p, &pi).unwrap();
            assert_eq!(asymmetry(lap.matrix()), 0.0);
        }
    }

    #[test]
    fn sqrt_pi_is_null_vector_at_damping_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(3..15);
            let adj = random_strongly_connected(&mut rng, n);
            let (p, pi) = walk(adj, 1.0);
            let lap = laplacian(&p, &pi).unwrap();
            let v = Array1::from_iter(pi.values().iter().map(|x| x.sqrt()));
            let residual = lap.matrix().dot(&v);
            let norm = residual.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(norm < 1e-10, "null-vector residual {norm}");
        }
    }

    #[test]
    fn rejects_nonpositive_pi() {
        let (p, _) = walk(array![[0.0, 1.0], [1.0, 0.0]], 1.0);
        let pi = StationaryDistribution::from_raw(array![1.0, 0.0], 0.0);
        assert!(matches!(
            laplacian(&p, &pi),
            Err(Error::NonPositiveStationary { index: 1, .. })
        ));
    }

    #[test]
    fn constant_scores_have_zero_smoothness() {
        let (p, pi) = walk(array![[0.0, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, 2.0, 0.0]], 1.0);
        let y = Array2::from_elem((3, 2), 0.7);
        assert_eq!(smoothness(&y, &p, &pi), 0.0);
    }

    #[test]
    fn edgeless_graph_has_empty_smoothness_sum() {
        let (p, pi) = walk(Array2::zeros((3, 3)), 0.85);
        let y = array![[1.0, 0.0], [0.0, 2.0], [3.0, 1.0]];
        assert_eq!(smoothness(&y, &p, &pi), 0.0);
        assert!(p.structural_edges().is_empty());
    }

    #[test]
    fn two_cycle_matches_trace_form() {
        let (p, pi) = walk(array![[0.0, 1.0], [1.0, 0.0]], 1.0);
        let lap = laplacian(&p, &pi).unwrap();
        // rows e_u scaled by 1/sqrt(pi_u)
        let y = array![
            [1.0 / pi.values()[0].sqrt(), 0.0],
            [0.0, 1.0 / pi.values()[1].sqrt()]
        ];
        let pairwise = smoothness(&y, &p, &pi);
        // trace route with F = Pi^{1/2} Y
        let f = scale_rows(&y, pi.values());
        let trace = trace_dot(&f, &lap.matrix().dot(&f));
        assert!((pairwise - trace).abs() < 1e-12);
    }

    fn scale_rows(y: &Array2<f64>, pi: &Array1<f64>) -> Array2<f64> {
        let mut f = y.clone();
        for (mut row, &p) in f.rows_mut().into_iter().zip(pi.iter()) {
            row.mapv_inplace(|x| x * p.sqrt());
        }
        f
    }

    #[test]
    fn pairwise_sum_equals_trace_form_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let n = rng.gen_range(3..20);
            let mut adj = Array2::<f64>::zeros((n, n));
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.5) {
                        let w = rng.gen_range(0.2..2.0);
                        adj[[u, v]] = w;
                        adj[[v, u]] = w;
                    }
                }
            }
            // damping 1 needs every node non-dangling: close a cycle
            for u in 0..n {
                let v = (u + 1) % n;
                if adj[[u, v]] == 0.0 {
                    adj[[u, v]] = 1.0;
                    adj[[v, u]] = 1.0;
                }
            }
            let (p, pi) = walk(adj, 1.0);
            let lap = laplacian(&p, &pi).unwrap();
            let y = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-2.0..2.0));
            let pairwise = smoothness(&y, &p, &pi);
            let f = scale_rows(&y, pi.values());
            let trace = trace_dot(&f, &lap.matrix().dot(&f));
            assert!(
                (pairwise - trace).abs() < 1e-10,
                "pairwise {pairwise} vs trace {trace}"
            );
        }
    }

    #[test]
    fn symmetric_graph_with_damping_one_matches_normalized_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(3..15);
            let mut adj = Array2::<f64>::zeros((n, n));
            for u in 0..n {
                let v = (u + 1) % n;
                adj[[u, v]] = 1.0;
                adj[[v, u]] = 1.0;
            }
            for _ in 0..2 * n {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v {
                    let w = rng.gen_range(0.5..2.0);
                    adj[[u, v]] = w;
                    adj[[v, u]] = w;
                }
            }
            let (p, pi) = walk(adj.clone(), 1.0);
            let lap = laplacian(&p, &pi).unwrap();
            let degrees: Vec<f64> = (0..n).map(|u| adj.row(u).sum()).collect();
            let reference = Array2::from_shape_fn((n, n), |(u, v)| {
                let id = if u == v { 1.0 } else { 0.0 };
                id - adj[[u, v]] / (degrees[u] * degrees[v]).sqrt()
            });
            let worst = (lap.matrix() - &reference)
                .iter()
                .map(|x| x.abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-10, "normalized-laplacian mismatch {worst}");
        }
    }
}
