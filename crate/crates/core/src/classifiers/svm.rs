//! Soft-margin support vector classification solved by SMO.
//!
//! The dual problem
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! is solved two multipliers at a time. Each step picks the pair that most
//! violates the KKT conditions (the first by largest violation, the second
//! by second-order gain), solves the two-variable subproblem in closed form
//! and updates the gradient. The loop stops once the violation gap drops to
//! `tol`, which leaves every training point within `tol` of its KKT
//! condition on `y_i f(x_i)`.
//!
//! Multiclass problems are decomposed one-vs-rest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};
use crate::features::{Dataset, SparseVector};
use crate::scalar::Scalar;

/// Stand-in for non-positive curvature along the chosen pair.
const TAU: f64 = 1e-12;
/// Multipliers at or below this are not kept as support vectors.
const ALPHA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub enum Kernel<F> {
    Linear,
    /// `tanh(gamma * u.v + coef0)`; not positive semidefinite in general.
    Sigmoid { gamma: F, coef0: F },
}

pub fn kernel_eval<F: Scalar>(kernel: &Kernel<F>, u: &SparseVector<F>, v: &SparseVector<F>) -> F {
    kernel.apply(u.dot(v))
}

impl<F: Scalar> Kernel<F> {
    /// Kernel value from the inner product.
    pub fn apply(&self, dot: F) -> F {
        match *self {
            Kernel::Linear => dot,
            Kernel::Sigmoid { gamma, coef0 } => (gamma * dot + coef0).tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams<F> {
    pub c: F,
    pub tol: F,
    /// The iteration cap is `max_passes * n` pair updates.
    pub max_passes: usize,
}

impl<F: Scalar> Default for SmoParams<F> {
    fn default() -> Self {
        SmoParams {
            c: F::one(),
            tol: F::of(1e-3),
            max_passes: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct SvmBinaryModel<F> {
    pub support_vectors: Vec<SparseVector<F>>,
    /// `alpha_i * y_i` for each support vector.
    pub coefficients: Vec<F>,
    pub bias: F,
    pub kernel: Kernel<F>,
    pub c: F,
    /// False when the iteration cap was hit before the KKT gap closed.
    pub converged: bool,
    pub iterations: usize,
}

impl<F: Scalar> SvmBinaryModel<F> {
    /// `f(x) = sum_i coef_i K(sv_i, x) + b`.
    pub fn decision(&self, x: &SparseVector<F>) -> F {
        self.decision_dense(&x.to_dense())
    }

    /// Same as [`decision`](Self::decision) with `x` already scattered into
    /// a dense slice (indices past its end read as zero).
    fn decision_dense(&self, x: &[F]) -> F {
        self.support_vectors.iter().zip(&self.coefficients).fold(self.bias, |acc, (sv, &a)| {
            let dot = sv
                .entries()
                .iter()
                .filter(|&&(k, _)| k < x.len())
                .fold(F::zero(), |s, &(k, w)| s + w * x[k]);
            acc + a * self.kernel.apply(dot)
        })
    }

    /// Explicit weight vector; only meaningful for the linear kernel.
    pub fn linear_weights(&self) -> Option<SparseVector<F>> {
        matches!(self.kernel, Kernel::Linear).then(|| {
            SparseVector::from_pairs(
                self.support_vectors
                    .iter()
                    .zip(&self.coefficients)
                    .flat_map(|(sv, &a)| sv.entries().iter().map(move |&(i, w)| (i, a * w))),
            )
        })
    }
}

/// Dense symmetric Gram matrix.
pub struct KernelMatrix<F> {
    n: usize,
    values: Vec<F>,
}

impl<F: Scalar> KernelMatrix<F> {
    pub fn new(kernel: &Kernel<F>, vectors: &[SparseVector<F>]) -> Self {
        let n = vectors.len();
        let dim = vectors.iter().filter_map(|v| v.entries().last()).map(|&(i, _)| i + 1).max().unwrap_or(0);
        // upper triangle, row i scattered into a dense buffer
        let rows: Vec<Vec<F>> = (0..n)
            .into_par_iter()
            .map_init(
                || vec![F::zero(); dim],
                |dense, i| {
                    for &(k, w) in vectors[i].entries() {
                        dense[k] = w;
                    }
                    let row = vectors[i..]
                        .iter()
                        .map(|v| {
                            let dot = v.entries().iter().fold(F::zero(), |acc, &(k, w)| acc + dense[k] * w);
                            kernel.apply(dot)
                        })
                        .collect();
                    for &(k, _) in vectors[i].entries() {
                        dense[k] = F::zero();
                    }
                    row
                },
            )
            .collect();
        let mut values = vec![F::zero(); n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                values[i * n + i + off] = v;
                values[(i + off) * n + i] = v;
            }
        }
        KernelMatrix { n, values }
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.values[i * self.n + j]
    }
}

/// Full solver output, including multipliers for every training point.
#[derive(Debug, Clone)]
pub struct SmoSolution<F> {
    pub alphas: Vec<F>,
    pub bias: F,
    pub converged: bool,
    pub iterations: usize,
}

/// SMO over a precomputed Gram matrix; `positive[i]` marks `y_i = +1`.
pub fn solve_smo<F: Scalar>(gram: &KernelMatrix<F>, positive: &[bool], params: &SmoParams<F>) -> Result<SmoSolution<F>> {
    let n = positive.len();
    if n != gram.n {
        return Err(Error::Validation("label count does not match the kernel matrix".into()));
    }
    if positive.iter().all(|&p| p) || positive.iter().all(|&p| !p) {
        return Err(Error::Validation("binary SVM training needs both classes".into()));
    }
    if params.c.partial_cmp(&F::zero()) != Some(std::cmp::Ordering::Greater)
        || params.tol.partial_cmp(&F::zero()) != Some(std::cmp::Ordering::Greater)
    {
        return Err(Error::Validation("C and tol must be positive".into()));
    }

    let y: Vec<F> = positive.iter().map(|&p| if p { F::one() } else { -F::one() }).collect();
    let c = params.c;
    let tau = F::of(TAU);
    let two = F::of(2.0);
    let mut alpha = vec![F::zero(); n];
    // gradient of the dual objective: G = Q a - e
    let mut grad = vec![-F::one(); n];
    let in_up = |a: F, yi: F| (yi > F::zero() && a < c) || (yi < F::zero() && a > F::zero());
    let in_low = |a: F, yi: F| (yi > F::zero() && a > F::zero()) || (yi < F::zero() && a < c);

    let max_iter = params.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i: largest -y G over the "up" set
        let mut i = usize::MAX;
        let mut g_max = F::neg_infinity();
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i = t;
                }
            }
        }
        // j: second-order choice over the "low" set; also track the gap
        let mut j = usize::MAX;
        let mut g_min = F::infinity();
        let mut best_obj = F::infinity();
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            if v < g_min {
                g_min = v;
            }
            if i != usize::MAX {
                let b = g_max - v;
                if b > F::zero() {
                    let mut a = gram.get(i, i) + gram.get(t, t) - two * gram.get(i, t);
                    if a <= F::zero() {
                        a = tau;
                    }
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min <= params.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (kii, kjj, kij) = (gram.get(i, i), gram.get(j, j), gram.get(i, j));
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = kii + kjj - two * kij;
            if quad <= F::zero() {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] = alpha[i] + delta;
            alpha[j] = alpha[j] + delta;
            if diff > F::zero() {
                if alpha[j] < F::zero() {
                    alpha[j] = F::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < F::zero() {
                alpha[i] = F::zero();
                alpha[j] = -diff;
            }
            if diff > F::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kii + kjj - two * kij;
            if quad <= F::zero() {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] = alpha[i] - delta;
            alpha[j] = alpha[j] + delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < F::zero() {
                alpha[j] = F::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < F::zero() {
                alpha[i] = F::zero();
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            // Q_ti = y_t y_i K_ti
            grad[t] = grad[t] + y[t] * (y[i] * gram.get(t, i) * di + y[j] * gram.get(t, j) * dj);
        }
    }

    Ok(SmoSolution {
        bias: -rho(&alpha, &grad, &y, c),
        alphas: alpha,
        converged,
        iterations,
    })
}

/// Offset such that `f(x) = sum a_i y_i K(x_i, x) - rho`: the mean of
/// `y_i G_i` over free multipliers, or the midpoint of the feasible
/// interval when none are free.
fn rho<F: Scalar>(alpha: &[F], grad: &[F], y: &[F], c: F) -> F {
    let mut upper = F::infinity();
    let mut lower = F::neg_infinity();
    let mut sum_free = F::zero();
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < F::zero() {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= F::zero() {
            if y[t] > F::zero() {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            sum_free = sum_free + yg;
        }
    }
    if free > 0 {
        sum_free / F::count(free)
    } else {
        (upper + lower) / F::of(2.0)
    }
}

fn build_binary<F: Scalar>(
    vectors: &[SparseVector<F>],
    positive: &[bool],
    kernel: Kernel<F>,
    params: &SmoParams<F>,
    sol: SmoSolution<F>,
) -> SvmBinaryModel<F> {
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for ((v, &p), &a) in vectors.iter().zip(positive).zip(&sol.alphas) {
        if a.abs() > F::of(ALPHA_EPS) {
            support_vectors.push(v.clone());
            coefficients.push(if p { a } else { -a });
        }
    }
    SvmBinaryModel {
        support_vectors,
        coefficients,
        bias: sol.bias,
        kernel,
        c: params.c,
        converged: sol.converged,
        iterations: sol.iterations,
    }
}

/// Binary C-SVC; `positive[i]` marks `y_i = +1`.
pub fn train_binary_svm<F: Scalar>(
    vectors: &[SparseVector<F>],
    positive: &[bool],
    kernel: Kernel<F>,
    params: &SmoParams<F>,
) -> Result<SvmBinaryModel<F>> {
    if vectors.len() != positive.len() {
        return Err(Error::Validation("vectors and labels differ in length".into()));
    }
    let gram = KernelMatrix::new(&kernel, vectors);
    let sol = solve_smo(&gram, positive, params)?;
    Ok(build_binary(vectors, positive, kernel, params, sol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct SvmModel<F> {
    /// One model per category: that category against the rest.
    pub binaries: Vec<SvmBinaryModel<F>>,
}

impl<F: Scalar> SvmModel<F> {
    pub fn decision_values(&self, x: &SparseVector<F>) -> Vec<F> {
        let dense = x.to_dense();
        self.binaries.iter().map(|b| b.decision_dense(&dense)).collect()
    }

    pub fn converged(&self) -> bool {
        self.binaries.iter().all(|b| b.converged)
    }
}

/// One-vs-rest over all categories of `data`.
pub fn train_svm<F: Scalar>(data: &Dataset<F>, kernel: Kernel<F>, params: &SmoParams<F>) -> Result<SvmModel<F>> {
    if data.num_categories < 2 {
        return Err(Error::Validation("SVM training needs at least 2 categories".into()));
    }
    let gram = KernelMatrix::new(&kernel, &data.vectors);
    let binaries = (0..data.num_categories)
        .into_par_iter()
        .map(|c| {
            let positive: Vec<bool> = data.labels.iter().map(|&l| l == c).collect();
            let sol = solve_smo(&gram, &positive, params)
                .map_err(|e| Error::Validation(format!("category {c} against the rest: {e}")))?;
            Ok(build_binary(&data.vectors, &positive, kernel, params, sol))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SvmModel { binaries })
}

pub fn svm_predict<F: Scalar>(model: &SvmModel<F>, x: &SparseVector<F>) -> usize {
    argmax(&model.decision_values(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(x)
    }

    #[test]
    fn gram_matches_pairwise_kernel() {
        let vs = vec![
            pt(&[0.6, 0.0, -0.8]),
            SparseVector::zero(),
            pt(&[0.0, 1.0]),
            pt(&[0.3, -0.2, 0.1, 0.9]),
        ];
        let k = Kernel::Sigmoid { gamma: 0.7, coef0: -0.1 };
        let gram = KernelMatrix::new(&k, &vs);
        for i in 0..vs.len() {
            for j in 0..vs.len() {
                assert_eq!(gram.get(i, j), kernel_eval(&k, &vs[i], &vs[j]));
            }
        }
    }

    #[test]
    fn kernel_values() {
        let u = pt(&[0.6, 0.8]);
        let v = pt(&[1.0, 0.5]);
        let flat = Kernel::Sigmoid { gamma: 0.0, coef0: 0.3 };
        assert_eq!(kernel_eval(&flat, &u, &v), 0.3f64.tanh());
        let orth = Kernel::Sigmoid { gamma: 2.0, coef0: 0.0 };
        assert_eq!(kernel_eval(&orth, &pt(&[1.0, 0.0]), &pt(&[0.0, 1.0])), 0.0);
        // u.v = 0.8
        let k = Kernel::Sigmoid { gamma: 0.5, coef0: 0.0 };
        let a = pt(&[0.8]);
        assert!((kernel_eval(&k, &a, &pt(&[1.0])) - 0.379948962255225).abs() < 1e-12);
        assert_eq!(kernel_eval(&Kernel::Linear, &u, &v), 1.0);
    }

    #[test]
    fn symmetric_two_point_problem() {
        let xs = [pt(&[-1.0]), pt(&[1.0])];
        let params = SmoParams { c: 10.0, ..SmoParams::default() };
        let m = train_binary_svm(&xs, &[false, true], Kernel::Linear, &params).unwrap();
        assert!(m.converged);
        assert!(m.decision(&SparseVector::zero()).abs() < 1e-6);
        assert!(m.decision(&xs[0]) < 0.0 && m.decision(&xs[1]) > 0.0);
        // analytic optimum: alpha = 1/2 each, w = 1
        let w = m.linear_weights().unwrap();
        assert!((w.get(0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_class_is_rejected() {
        let xs = [pt(&[1.0]), pt(&[2.0])];
        let r = train_binary_svm(&xs, &[true, true], Kernel::Linear, &SmoParams::default());
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn kkt_conditions_hold_on_convergence() {
        let xs: Vec<SparseVector<f64>> = (0..20)
            .map(|i| {
                let t = i as f64 / 19.0;
                pt(&[t, (t * 7.0).sin()])
            })
            .collect();
        let positive: Vec<bool> = (0..20).map(|i| (i * 7) % 5 < 2).collect();
        let params = SmoParams { c: 2.0, ..SmoParams::default() };
        let gram = KernelMatrix::new(&Kernel::Linear, &xs);
        let sol = solve_smo(&gram, &positive, &params).unwrap();
        assert!(sol.converged);
        let y: Vec<f64> = positive.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();
        for i in 0..xs.len() {
            let f: f64 = (0..xs.len()).map(|j| sol.alphas[j] * y[j] * gram.get(i, j)).sum::<f64>() + sol.bias;
            let margin = y[i] * f;
            let a = sol.alphas[i];
            assert!((0.0..=params.c).contains(&a));
            if a <= 0.0 {
                assert!(margin >= 1.0 - params.tol, "i={i} margin={margin}");
            } else if a >= params.c {
                assert!(margin <= 1.0 + params.tol, "i={i} margin={margin}");
            } else {
                assert!((margin - 1.0).abs() <= params.tol, "i={i} margin={margin}");
            }
        }
    }

    #[test]
    fn hand_set_model_matches_kernel_expansion() {
        let k = Kernel::Sigmoid { gamma: 0.5, coef0: 0.1 };
        let m = SvmBinaryModel {
            support_vectors: vec![pt(&[1.0, 0.0]), pt(&[0.0, 2.0])],
            coefficients: vec![0.7, -0.4],
            bias: 0.25,
            kernel: k,
            c: 1.0,
            converged: true,
            iterations: 0,
        };
        let x = pt(&[0.5, 0.5]);
        let expected = 0.7 * (0.5f64 * 0.5 + 0.1).tanh() - 0.4 * (0.5f64 * 1.0 + 0.1).tanh() + 0.25;
        assert!((m.decision(&x) - expected).abs() < 1e-15);
        let two = SvmModel { binaries: vec![m.clone(), SvmBinaryModel { bias: 10.0, ..m }] };
        assert_eq!(svm_predict(&two, &x), 1);
    }

    #[test]
    fn equal_decisions_go_to_lower_index() {
        let m = SvmBinaryModel::<f64> {
            support_vectors: vec![],
            coefficients: vec![],
            bias: 0.5,
            kernel: Kernel::Linear,
            c: 1.0,
            converged: true,
            iterations: 0,
        };
        let model = SvmModel { binaries: vec![m.clone(), m.clone(), m] };
        assert_eq!(svm_predict(&model, &SparseVector::zero()), 0);
    }
}
