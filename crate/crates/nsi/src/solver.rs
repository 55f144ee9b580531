//! The joint objective and its solver.
//!
//! The model minimizes, over the weight matrix `W` (features × classes):
//!
//! ```text
//!   ½‖XᵀW − Y‖²_F  +  λ1‖W‖₁  +  (λ2/2)‖W‖₂,₁  +  (λs/2)·tr(WᵀX L XᵀW)
//! ```
//!
//! where `‖W‖₂,₁` sums the Frobenius norms of the group row-blocks of `W`
//! and `L` is the random-walk Laplacian over the training tweets. The group
//! and graph terms are handled by iterative reweighting: each sweep fixes
//! the diagonal matrix `D` from the current group norms and solves the
//! symmetric positive definite system
//!
//! ```text
//!   (XXᵀ + λ2·D + λs·X L Xᵀ) W = X Y
//! ```
//!
//! which drives the smooth part of the objective monotonically downward.
//! The ℓ1 term is applied once at the end as entrywise soft thresholding.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::features::{FeatureGroups, FeatureMatrix};
use crate::laplacian::GraphLaplacian;
use crate::linalg::cholesky_solve;

/// Binary class labels with a fixed order: negative is column 0, positive
/// is column 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    Negative,
    Positive,
}

impl Class {
    pub fn index(self) -> usize {
        match self {
            Class::Negative => 0,
            Class::Positive => 1,
        }
    }

    pub fn from_index(index: usize) -> Class {
        if index == 1 {
            Class::Positive
        } else {
            Class::Negative
        }
    }
}

/// One-hot label matrix, `n × 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    y: Array2<f64>,
}

impl LabelMatrix {
    pub fn from_classes(classes: &[Class]) -> Self {
        let mut y = Array2::<f64>::zeros((classes.len(), 2));
        for (i, class) in classes.iter().enumerate() {
            y[[i, class.index()]] = 1.0;
        }
        LabelMatrix { y }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.y.nrows() == 0
    }

    pub fn classes(&self) -> usize {
        self.y.ncols()
    }
}

/// Regularization strengths and stopping controls.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// ℓ1 strength, applied as a final soft threshold.
    pub lambda1: f64,
    /// Group (ℓ2,1) strength.
    pub lambda2: f64,
    /// Graph-smoothness strength.
    pub lambda_s: f64,
    /// Floor for the reweighting denominators.
    pub epsilon: f64,
    /// Relative change of the smooth objective that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda1: 0.01,
            lambda2: 0.5,
            lambda_s: 0.4,
            epsilon: 1e-10,
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 || self.lambda_s < 0.0 {
            return Err(Error::DegenerateConfig(
                "regularization strengths must be nonnegative".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::DegenerateConfig("epsilon must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::DegenerateConfig("tol must be positive".into()));
        }
        Ok(())
    }
}

/// What happened during a fit. `objective_trace` holds the full objective
/// (ℓ1 term included) at each iterate; `smooth_trace` holds the smooth
/// functional the sweeps actually minimize, which is the one guaranteed to
/// be non-increasing and the one the stopping rule watches.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub objective_trace: Vec<f64>,
    pub smooth_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Fraction of exactly-zero rows of `W` after the final threshold.
    pub final_sparsity: f64,
}

fn check_dims(
    x: &FeatureMatrix,
    y: &LabelMatrix,
    lap: Option<&GraphLaplacian>,
    groups: Option<&FeatureGroups>,
) -> Result<()> {
    if y.len() != x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} label rows for {} feature columns",
            y.len(),
            x.ncols()
        )));
    }
    if let Some(l) = lap {
        if l.len() != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "laplacian over {} tweets for {} feature columns",
                l.len(),
                x.ncols()
            )));
        }
    }
    if let Some(g) = groups {
        if g.row_count() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "groups cover {} rows, matrix has {}",
                g.row_count(),
                x.nrows()
            )));
        }
    }
    Ok(())
}

/// Frobenius norm of each group row-block of `w`.
pub fn group_norms(w: &Array2<f64>, groups: &FeatureGroups) -> Vec<f64> {
    groups
        .groups()
        .iter()
        .map(|rows| {
            rows.iter()
                .map(|&r| w.row(r).iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Grouped ℓ2,1 norm: sum of the group block norms.
pub fn l21_norm(w: &Array2<f64>, groups: &FeatureGroups) -> f64 {
    group_norms(w, groups).iter().sum()
}

/// `tr(WᵀX L XᵀW)`, evaluated through the predictions `Z = XᵀW` so the
/// value agrees with the pairwise smoothness route.
fn graph_quadratic(w: &Array2<f64>, x: &FeatureMatrix, lap: &GraphLaplacian) -> f64 {
    let z = x.matrix().xt_dot(w);
    let lz = lap.matrix().dot(&z);
    crate::linalg::trace_dot(&z, &lz)
}

/// Full objective: `½‖XᵀW − Y‖² + λ1‖W‖₁ + (λ2/2)‖W‖₂,₁ + (λs/2)·tr(WᵀXLXᵀW)`.
pub fn objective(
    w: &Array2<f64>,
    x: &FeatureMatrix,
    y: &LabelMatrix,
    lap: Option<&GraphLaplacian>,
    groups: &FeatureGroups,
    h: &Hyperparams,
) -> Result<f64> {
    check_dims(x, y, lap, Some(groups))?;
    let residual = x.matrix().xt_dot(w) - y.matrix();
    let fit = 0.5 * crate::linalg::frob_sq(&residual);
    let l1 = h.lambda1 * w.iter().map(|v| v.abs()).sum::<f64>();
    let l21 = 0.5 * h.lambda2 * l21_norm(w, groups);
    let smooth = match (h.lambda_s > 0.0, lap) {
        (true, Some(l)) => 0.5 * h.lambda_s * graph_quadratic(w, x, l),
        (true, None) => {
            return Err(Error::DimensionMismatch(
                "lambda_s > 0 needs a laplacian".into(),
            ))
        }
        (false, _) => 0.0,
    };
    Ok(fit + l1 + l21 + smooth)
}

/// The smooth functional the sweeps minimize (ℓ1 term excluded, halves
/// folded out): `‖XᵀW − Y‖² + λ2‖W‖₂,₁ + λs·tr(WᵀXLXᵀW)`.
pub fn smooth_objective(
    w: &Array2<f64>,
    x: &FeatureMatrix,
    y: &LabelMatrix,
    lap: Option<&GraphLaplacian>,
    groups: &FeatureGroups,
    h: &Hyperparams,
) -> Result<f64> {
    check_dims(x, y, lap, Some(groups))?;
    let residual = x.matrix().xt_dot(w) - y.matrix();
    let fit = crate::linalg::frob_sq(&residual);
    let l21 = h.lambda2 * l21_norm(w, groups);
    let smooth = match (h.lambda_s > 0.0, lap) {
        (true, Some(l)) => h.lambda_s * graph_quadratic(w, x, l),
        (true, None) => {
            return Err(Error::DimensionMismatch(
                "lambda_s > 0 needs a laplacian".into(),
            ))
        }
        (false, _) => 0.0,
    };
    Ok(fit + l21 + smooth)
}

/// Reweighting diagonal: `D_jj = 1 / (2·max(‖w_g(j)‖₂, ε))`, one shared
/// value per group. The floor keeps dead groups pinned near zero instead of
/// dividing by zero.
pub fn reweight(w: &Array2<f64>, groups: &FeatureGroups, h: &Hyperparams) -> Array1<f64> {
    let norms = group_norms(w, groups);
    let mut d = Array1::<f64>::zeros(w.nrows());
    for (g, rows) in groups.groups().iter().enumerate() {
        let value = 1.0 / (2.0 * norms[g].max(h.epsilon));
        for &r in rows {
            d[r] = value;
        }
    }
    d
}

/// One closed-form sweep: solves `(XXᵀ + λ2·D + λs·XLXᵀ) W = XY` by
/// Cholesky factorization. Never forms an inverse.
pub fn irls_step(
    x: &FeatureMatrix,
    y: &LabelMatrix,
    lap: Option<&GraphLaplacian>,
    d: &Array1<f64>,
    h: &Hyperparams,
) -> Result<Array2<f64>> {
    check_dims(x, y, lap, None)?;
    let mut a = x.matrix().xxt();
    if h.lambda_s > 0.0 {
        let l = lap.ok_or_else(|| {
            Error::DimensionMismatch("lambda_s > 0 needs a laplacian".into())
        })?;
        a += &x.matrix().x_l_xt(l.matrix()).mapv(|v| v * h.lambda_s);
    }
    for j in 0..x.nrows() {
        a[[j, j]] += h.lambda2 * d[j];
    }
    let xy = x.matrix().xy(y.matrix());
    cholesky_solve(&a, &xy)
}

/// Gradient of the smooth objective at fixed `D` (halved form):
/// `XXᵀW − XY + λ2·DW + λs·XLXᵀW`. At the sweep's solution this is zero.
pub fn gradient_smooth(
    w: &Array2<f64>,
    x: &FeatureMatrix,
    y: &LabelMatrix,
    lap: Option<&GraphLaplacian>,
    d: &Array1<f64>,
    h: &Hyperparams,
) -> Result<Array2<f64>> {
    check_dims(x, y, lap, None)?;
    let z = x.matrix().xt_dot(w);
    let mut grad = x.matrix().xy(&z) - x.matrix().xy(y.matrix());
    for j in 0..w.nrows() {
        for k in 0..w.ncols() {
            grad[[j, k]] += h.lambda2 * d[j] * w[[j, k]];
        }
    }
    if h.lambda_s > 0.0 {
        let l = lap.ok_or_else(|| {
            Error::DimensionMismatch("lambda_s > 0 needs a laplacian".into())
        })?;
        let lz = l.matrix().dot(&z);
        grad += &x.matrix().xy(&lz).mapv(|v| v * h.lambda_s);
    }
    Ok(grad)
}

/// Entrywise soft threshold by `lambda1`; realizes the ℓ1 penalty as a
/// final proximal step.
pub fn l1_sparsify(w: &Array2<f64>, lambda1: f64) -> Array2<f64> {
    w.mapv(|v| {
        let shrunk = v.abs() - lambda1;
        if shrunk > 0.0 {
            shrunk * v.signum()
        } else {
            0.0
        }
    })
}

/// Fits the model with the Laplacian spanning exactly the training columns.
pub fn fit(
    x: &FeatureMatrix,
    y: &LabelMatrix,
    lap: Option<&GraphLaplacian>,
    groups: &FeatureGroups,
    h: &Hyperparams,
) -> Result<(Array2<f64>, FitReport)> {
    fit_with_graph(x, y, lap.map(|l| (x, l)), groups, h)
}

/// Fits with the graph term over a possibly wider tweet set (the
/// transductive variant): `graph` pairs a feature matrix with a Laplacian
/// over the same columns, while the data term uses `x` and `y` alone.
pub fn fit_with_graph(
    x: &FeatureMatrix,
    y: &LabelMatrix,
    graph: Option<(&FeatureMatrix, &GraphLaplacian)>,
    groups: &FeatureGroups,
    h: &Hyperparams,
) -> Result<(Array2<f64>, FitReport)> {
    h.validate()?;
    check_dims(x, y, None, Some(groups))?;
    let m = x.nrows();
    let c = y.classes();
    let use_graph = h.lambda_s > 0.0;
    let smoother: Option<Array2<f64>> = match (use_graph, graph) {
        (true, Some((xg, lg))) => {
            if xg.nrows() != m {
                return Err(Error::DimensionMismatch(format!(
                    "graph features have {} rows, data has {m}",
                    xg.nrows()
                )));
            }
            if lg.len() != xg.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "laplacian over {} tweets for {} graph columns",
                    lg.len(),
                    xg.ncols()
                )));
            }
            Some(xg.matrix().x_l_xt(lg.matrix()).mapv(|v| v * h.lambda_s))
        }
        (true, None) => {
            return Err(Error::DimensionMismatch(
                "lambda_s > 0 needs a laplacian".into(),
            ))
        }
        (false, _) => None,
    };

    let gram = x.matrix().xxt();
    let xy = x.matrix().xy(y.matrix());

    // Identity start, extended row-wise: W[j, k] = 1 exactly when
    // k == j mod c. A square identity gives every row unit norm; the
    // truncated pattern would instead start most groups at zero, where the
    // floored reweighting pins them hard enough that the objective-change
    // stopping rule fires before they can recover.
    let mut w = Array2::<f64>::zeros((m, c));
    for j in 0..m {
        w[[j, j % c]] = 1.0;
    }

    let eval_traces = |w: &Array2<f64>| -> (f64, f64) {
        let z = x.matrix().xt_dot(w);
        let residual = &z - y.matrix();
        let fit_sq = crate::linalg::frob_sq(&residual);
        let l21 = l21_norm(w, groups);
        let quad = match &smoother {
            // tr(Wᵀ (λs·XgLXgᵀ) W), already scaled by λs
            Some(s) => crate::linalg::trace_dot(w, &s.dot(w)),
            None => 0.0,
        };
        let smooth = fit_sq + h.lambda2 * l21 + quad;
        let l1 = h.lambda1 * w.iter().map(|v| v.abs()).sum::<f64>();
        let full = 0.5 * fit_sq + l1 + 0.5 * h.lambda2 * l21 + 0.5 * quad;
        (smooth, full)
    };

    let mut smooth_trace = Vec::new();
    let mut objective_trace = Vec::new();
    let mut previous = eval_traces(&w).0;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..h.max_iter {
        let d = reweight(&w, groups, h);
        let mut a = gram.clone();
        if let Some(s) = &smoother {
            a += s;
        }
        for j in 0..m {
            a[[j, j]] += h.lambda2 * d[j];
        }
        w = cholesky_solve(&a, &xy)?;
        iterations += 1;

        let (smooth, full) = eval_traces(&w);
        smooth_trace.push(smooth);
        objective_trace.push(full);

        let denom = previous.abs().max(f64::MIN_POSITIVE);
        if (previous - smooth).abs() / denom < h.tol {
            converged = true;
            break;
        }
        previous = smooth;
    }

    let w = l1_sparsify(&w, h.lambda1);
    let zero_rows = (0..m)
        .filter(|&j| w.row(j).iter().all(|&v| v == 0.0))
        .count();
    let report = FitReport {
        objective_trace,
        smooth_trace,
        iterations,
        converged,
        final_sparsity: zero_rows as f64 / m.max(1) as f64,
    };
    Ok((w, report))
}

/// Class scores `xᵀw_k` for one column of the feature matrix.
pub fn predict_scores(x: &FeatureMatrix, col: usize, w: &Array2<f64>) -> Vec<f64> {
    x.matrix().col_scores(col, w)
}

/// Argmax over the class scores; ties go to the negative class.
pub fn predict(x: &FeatureMatrix, col: usize, w: &Array2<f64>) -> Class {
    let scores = predict_scores(x, col, w);
    classify(&scores)
}

/// Prediction from a dense feature vector.
pub fn predict_dense(x_col: &Array1<f64>, w: &Array2<f64>) -> Class {
    let scores: Vec<f64> = (0..w.ncols())
        .map(|k| x_col.iter().zip(w.column(k)).map(|(x, w)| x * w).sum())
        .collect();
    classify(&scores)
}

fn classify(scores: &[f64]) -> Class {
    if scores[1] > scores[0] {
        Class::Positive
    } else {
        Class::Negative
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::ColumnNorm;
    use crate::sparse::SparseMatrix;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn feature_matrix(dense: Array2<f64>) -> FeatureMatrix {
        let ids = (0..dense.ncols()).map(|j| format!("t{j:02}")).collect();
        FeatureMatrix::from_parts(SparseMatrix::from_dense(&dense), ids, ColumnNorm::None)
    }

    fn identity_problem() -> (FeatureMatrix, LabelMatrix, FeatureGroups) {
        let x = feature_matrix(array![[1.0, 0.0], [0.0, 1.0]]);
        let y = LabelMatrix::from_classes(&[Class::Negative, Class::Positive]);
        let groups = FeatureGroups::singletons(2);
        (x, y, groups)
    }

    fn no_reg() -> Hyperparams {
        Hyperparams {
            lambda1: 0.0,
            lambda2: 0.0,
            lambda_s: 0.0,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn zero_weights_objective_is_half_n() {
        let (x, y, groups) = identity_problem();
        let w = Array2::zeros((2, 2));
        let h = Hyperparams {
            lambda_s: 0.0,
            ..Hyperparams::default()
        };
        let value = objective(&w, &x, &y, None, &groups, &h).unwrap();
        assert!((value - 1.0).abs() < 1e-15); // n/2 with n = 2
    }

    #[test]
    fn exact_fit_objective_is_zero() {
        let (x, y, groups) = identity_problem();
        let w = Array2::eye(2);
        let value = objective(&w, &x, &y, None, &groups, &no_reg()).unwrap();
        assert!(value.abs() < 1e-15);
    }

    #[test]
    fn reweight_uses_group_block_norms() {
        let groups = FeatureGroups::from_keys(vec!["g".into(), "g".into()]);
        // block norm sqrt(9 + 16) = 5 -> D entries 0.1
        let w = array![[3.0, 0.0], [0.0, 4.0]];
        let d = reweight(&w, &groups, &Hyperparams::default());
        assert!((d[0] - 0.1).abs() < 1e-15);
        assert!((d[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn reweight_floors_zero_groups() {
        let groups = FeatureGroups::singletons(1);
        let w = array![[0.0, 0.0]];
        let h = Hyperparams::default();
        let d = reweight(&w, &groups, &h);
        assert!((d[0] - 5e9).abs() < 1.0);
    }

    #[test]
    fn reweight_singletons_reduce_to_row_norms() {
        let groups = FeatureGroups::singletons(2);
        let w = array![[3.0, 4.0], [0.5, 0.0]];
        let d = reweight(&w, &groups, &Hyperparams::default());
        assert!((d[0] - 1.0 / 10.0).abs() < 1e-15);
        assert!((d[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_system_solves_immediately() {
        let (x, y, groups) = identity_problem();
        let d = Array1::zeros(2);
        let w = irls_step(&x, &y, None, &d, &no_reg()).unwrap();
        let eye: Array2<f64> = Array2::eye(2);
        assert!((&w - &eye).iter().all(|v| v.abs() < 1e-12));
        let _ = groups;
    }

    #[test]
    fn stronger_lambda2_shrinks_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dense = Array2::from_shape_fn((4, 6), |_| rng.gen_range(-1.0..1.0));
        let x = feature_matrix(dense);
        let classes: Vec<Class> = (0..6)
            .map(|i| if i % 2 == 0 { Class::Positive } else { Class::Negative })
            .collect();
        let y = LabelMatrix::from_classes(&classes);
        let w0 = Array2::from_elem((4, 2), 1.0);
        let groups = FeatureGroups::singletons(4);
        let mut norms = Vec::new();
        for lambda2 in [1.0, 10.0, 100.0] {
            let h = Hyperparams {
                lambda2,
                lambda_s: 0.0,
                lambda1: 0.0,
                ..Hyperparams::default()
            };
            let d = reweight(&w0, &groups, &h);
            let w = irls_step(&x, &y, None, &d, &h).unwrap();
            norms.push(crate::linalg::frob_sq(&w).sqrt());
        }
        assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
    }

    #[test]
    fn step_solves_the_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let dense = Array2::from_shape_fn((5, 7), |_| rng.gen_range(-1.0..1.0));
        let x = feature_matrix(dense.clone());
        let classes: Vec<Class> = (0..7)
            .map(|i| if i < 3 { Class::Positive } else { Class::Negative })
            .collect();
        let y = LabelMatrix::from_classes(&classes);
        let groups = FeatureGroups::singletons(5);
        let h = Hyperparams {
            lambda1: 0.0,
            lambda2: 0.3,
            lambda_s: 0.0,
            ..Hyperparams::default()
        };
        let w0 = Array2::from_elem((5, 2), 0.5);
        let d = reweight(&w0, &groups, &h);
        let w = irls_step(&x, &y, None, &d, &h).unwrap();

        let mut a = dense.dot(&dense.t());
        for j in 0..5 {
            a[[j, j]] += h.lambda2 * d[j];
        }
        let xy = dense.dot(y.matrix());
        let residual = a.dot(&w) - &xy;
        let rel = crate::linalg::frob_sq(&residual).sqrt()
            / crate::linalg::frob_sq(&xy).sqrt();
        assert!(rel < 1e-8, "relative residual {rel}");
    }

    #[test]
    fn all_zero_regularization_on_rank_deficient_x_advises_lambda2() {
        let x = feature_matrix(array![[1.0, 1.0], [1.0, 1.0]]);
        let y = LabelMatrix::from_classes(&[Class::Negative, Class::Positive]);
        let d = Array1::zeros(2);
        let err = irls_step(&x, &y, None, &d, &no_reg()).unwrap_err();
        assert!(err.to_string().contains("lambda2"));
    }

    #[test]
    fn gradient_zero_at_step_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let dense = Array2::from_shape_fn((4, 5), |_| rng.gen_range(-1.0..1.0));
        let x = feature_matrix(dense);
        let classes: Vec<Class> = (0..5)
            .map(|i| if i % 2 == 0 { Class::Positive } else { Class::Negative })
            .collect();
        let y = LabelMatrix::from_classes(&classes);
        let groups = FeatureGroups::singletons(4);
        let h = Hyperparams {
            lambda1: 0.0,
            lambda2: 0.7,
            lambda_s: 0.0,
            ..Hyperparams::default()
        };
        let w0 = Array2::from_elem((4, 2), 0.3);
        let d = reweight(&w0, &groups, &h);
        let w = irls_step(&x, &y, None, &d, &h).unwrap();
        let g = gradient_smooth(&w, &x, &y, None, &d, &h).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn gradient_reduces_to_neg_xy_at_zero() {
        let (x, y, _) = identity_problem();
        let w = Array2::zeros((2, 2));
        let d = Array1::zeros(2);
        let g = gradient_smooth(&w, &x, &y, None, &d, &no_reg()).unwrap();
        let expected = -x.matrix().xy(y.matrix());
        assert_eq!(g, expected);
    }

    #[test]
    fn sparsify_examples() {
        let w = array![[0.005, -0.03]];
        assert_eq!(l1_sparsify(&w, 0.0), w);
        let t = l1_sparsify(&w, 0.01);
        assert_eq!(t[[0, 0]], 0.0);
        assert!((t[[0, 1]] + 0.02).abs() < 1e-15);
    }

    #[test]
    fn fit_without_regularization_solves_least_squares() {
        let (x, y, groups) = identity_problem();
        let (w, report) = fit(&x, &y, None, &groups, &no_reg()).unwrap();
        // XXᵀ W = XY with X = I reduces to W = Y
        assert!((&w - y.matrix()).iter().all(|v| v.abs() < 1e-12));
        assert!(report.iterations <= 2);
        assert!(report.converged);
    }

    #[test]
    fn fit_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let dense = Array2::from_shape_fn((6, 9), |_| rng.gen_range(-1.0..1.0));
        let x = feature_matrix(dense);
        let classes: Vec<Class> = (0..9)
            .map(|i| if i % 3 == 0 { Class::Positive } else { Class::Negative })
            .collect();
        let y = LabelMatrix::from_classes(&classes);
        let groups = FeatureGroups::from_keys(
            vec!["a", "a", "b", "b", "c", "c"]
                .into_iter()
                .map(String::from)
                .collect(),
        );
        let h = Hyperparams::default();
        let lap = GraphLaplacian::from_matrix(Array2::eye(9)).unwrap();
        let (w1, r1) = fit(&x, &y, Some(&lap), &groups, &h).unwrap();
        let (w2, r2) = fit(&x, &y, Some(&lap), &groups, &h).unwrap();
        assert_eq!(w1, w2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn smooth_trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let m = rng.gen_range(2..8);
            let n = rng.gen_range(2..10);
            let dense = Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0));
            let x = feature_matrix(dense);
            let classes: Vec<Class> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { Class::Positive } else { Class::Negative })
                .collect();
            let y = LabelMatrix::from_classes(&classes);
            let groups = FeatureGroups::singletons(m);
            let b = Array2::from_shape_fn((n, n), |_| rng.gen_range(-0.5..0.5));
            let psd = b.t().dot(&b);
            let lap = GraphLaplacian::from_matrix(psd).unwrap();
            let h = Hyperparams {
                lambda1: 0.0,
                lambda2: rng.gen_range(0.01..1.0),
                lambda_s: rng.gen_range(0.01..1.0),
                ..Hyperparams::default()
            };
            let (_, report) = fit(&x, &y, Some(&lap), &groups, &h).unwrap();
            for pair in report.smooth_trace.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-9,
                    "trace increased: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn permuting_rows_permutes_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let dense = Array2::from_shape_fn((4, 6), |_| rng.gen_range(-1.0..1.0));
        let classes: Vec<Class> = (0..6)
            .map(|i| if i % 2 == 0 { Class::Positive } else { Class::Negative })
            .collect();
        let y = LabelMatrix::from_classes(&classes);
        let keys = vec!["g0", "g0", "g1", "g1"];

        let x = feature_matrix(dense.clone());
        let groups = FeatureGroups::from_keys(keys.iter().map(|s| s.to_string()).collect());
        // a fixed start is only equivariant in the limit, so converge hard
        let h = Hyperparams {
            lambda_s: 0.0,
            lambda1: 0.0,
            tol: 1e-14,
            max_iter: 5000,
            ..Hyperparams::default()
        };
        let (w, _) = fit(&x, &y, None, &groups, &h).unwrap();

        let perm = [2usize, 3, 0, 1];
        let mut permuted = Array2::zeros((4, 6));
        for (from, &to) in perm.iter().enumerate() {
            permuted.row_mut(to).assign(&dense.row(from));
        }
        let xp = feature_matrix(permuted);
        let keys_p: Vec<String> = {
            let mut v = vec![String::new(); 4];
            for (from, &to) in perm.iter().enumerate() {
                v[to] = keys[from].to_string();
            }
            v
        };
        let groups_p = FeatureGroups::from_keys(keys_p);
        let (wp, _) = fit(&xp, &y, None, &groups_p, &h).unwrap();
        // objective-change stopping gives roughly sqrt(tol) iterate accuracy
        for (from, &to) in perm.iter().enumerate() {
            for k in 0..2 {
                assert!((w[[from, k]] - wp[[to, k]]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn graph_term_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let n = rng.gen_range(2..8);
            let m = rng.gen_range(2..6);
            let b = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
            let psd = b.t().dot(&b);
            let lap = GraphLaplacian::from_matrix(psd).unwrap();
            let dense = Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0));
            let x = feature_matrix(dense);
            let w = Array2::from_shape_fn((m, 2), |_| rng.gen_range(-1.0..1.0));
            assert!(graph_quadratic(&w, &x, &lap) >= -1e-10);
        }
    }

    #[test]
    fn prediction_rules() {
        let x = feature_matrix(array![[2.0, 0.0], [1.0, 0.0]]);
        let w = Array2::eye(2);
        // scores (2, 1) -> class 0
        assert_eq!(predict(&x, 0, &w), Class::Negative);
        // zero vector ties -> class 0
        assert_eq!(predict(&x, 1, &w), Class::Negative);
        // positive scaling never changes the argmax
        let col = array![3.0, 5.0];
        let w2 = array![[1.0, 0.0], [0.0, 1.0]];
        for scale in [0.1, 1.0, 7.5] {
            let scaled = col.mapv(|v| v * scale);
            assert_eq!(predict_dense(&scaled, &w2), Class::Positive);
        }
    }

    #[test]
    fn constant_prediction_columns_on_uniform_cycle_have_zero_graph_term() {
        // 4-cycle: vertex-transitive, so pi is uniform and the constant
        // vector is the Laplacian null space
        let adj = array![
            [0.0, 1.0, 0.0, 1.0],
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [1.0, 0.0, 1.0, 0.0]
        ];
        let p = crate::walk::transition_from_adjacency(&adj, 1.0).unwrap();
        let pi = crate::walk::stationary_distribution(&p, 1e-14, 100_000).unwrap();
        let lap = crate::laplacian::laplacian(&p, &pi).unwrap();
        // one feature that is constant over tweets makes XᵀW constant
        let x = feature_matrix(Array2::from_elem((1, 4), 1.0));
        let w = array![[0.7, -0.2]];
        let quad = graph_quadratic(&w, &x, &lap);
        assert!(quad.abs() < 1e-12);
        let y_hat = x.matrix().xt_dot(&w);
        let pairwise = crate::laplacian::smoothness(&y_hat, &p, &pi);
        assert!(pairwise.abs() < 1e-12);
    }
}
