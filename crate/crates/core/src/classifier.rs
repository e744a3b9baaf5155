//! L2-regularized logistic regression without an intercept.
//!
//! The objective minimized everywhere in this crate is
//!
//! ```text
//!   J(w) = (λ/2)‖w‖² + Σ_{(x,y)} log(1 + exp(−y wᵀx))
//! ```
//!
//! trained by damped Newton iterations with Armijo backtracking. Strategy
//! code retrains this model thousands of times per query round, so the
//! training loop accepts warm starts; correctness of warm-started selections
//! is anchored by cold-start oracle tests.

use crate::data::Dataset;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub const NEWTON_TOL: f64 = 1e-8;
pub const NEWTON_MAX_ITERS: usize = 100;
const ARMIJO_C: f64 = 1e-4;
const BACKTRACK_FACTOR: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// A view of labeled training instances: rows of a dataset paired with
/// labels. The labels are supplied separately so hypothetical labelings
/// (the 𝓛⁺ = 𝓛 ∪ (x, y) sets used by retraining strategies) need no copy
/// of the feature matrix.
#[derive(Debug, Clone, Copy)]
pub struct Instances<'a> {
    pub data: &'a Dataset,
    pub rows: &'a [usize],
    pub labels: &'a [i8],
}

impl<'a> Instances<'a> {
    pub fn new(data: &'a Dataset, rows: &'a [usize], labels: &'a [i8]) -> Self {
        assert_eq!(rows.len(), labels.len(), "rows and labels must align");
        Instances { data, rows, labels }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub w: DVector<f64>,
    pub lambda: f64,
    pub converged: bool,
    pub final_grad_norm: f64,
    pub newton_iters: usize,
    /// Objective value at `w`; the minimum-loss-increase strategy reads the
    /// retrained objective straight from here.
    pub final_objective: f64,
}

impl Model {
    /// Small text record for reproducibility snapshots.
    pub fn to_text_record(&self, name: &str) -> String {
        let weights: Vec<String> = self.w.iter().map(|v| v.to_string()).collect();
        format!(
            "model {name} lambda={} d={} w={}",
            self.lambda,
            self.w.len(),
            weights.join(",")
        )
    }
}

/// Numerically safe σ(z) = 1/(1+exp(−z)).
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(−z)) without overflow: max(0, −z) + log1p(exp(−|z|)).
fn log1p_exp_neg(z: f64) -> f64 {
    z.max(0.0) - z + (-z.abs()).exp().ln_1p()
}

/// The regularized logistic objective J(w).
pub fn objective(w: &DVector<f64>, set: &Instances, lambda: f64) -> f64 {
    let mut loss = 0.5 * lambda * w.norm_squared();
    for (&row, &label) in set.rows.iter().zip(set.labels) {
        let z = f64::from(label) * set.data.row_dot(row, w);
        loss += log1p_exp_neg(z);
    }
    loss
}

/// Gradient of J: λw − Σ y x σ(−y wᵀx).
pub fn gradient(w: &DVector<f64>, set: &Instances, lambda: f64) -> DVector<f64> {
    let mut g = w * lambda;
    for (&row, &label) in set.rows.iter().zip(set.labels) {
        let y = f64::from(label);
        let z = y * set.data.row_dot(row, w);
        let coeff = y * sigmoid(-z);
        for j in 0..set.data.d() {
            g[j] -= coeff * set.data.x[(row, j)];
        }
    }
    g
}

/// Hessian of J: λI + Σ σ(wᵀx)(1 − σ(wᵀx)) x xᵀ (label-independent).
fn hessian(w: &DVector<f64>, set: &Instances, lambda: f64) -> DMatrix<f64> {
    let d = set.data.d();
    let mut h = DMatrix::zeros(d, d);
    for &row in set.rows {
        let m = set.data.row_dot(row, w);
        let s = sigmoid(m);
        let coeff = s * (1.0 - s);
        for a in 0..d {
            let xa = coeff * set.data.x[(row, a)];
            for b in a..d {
                h[(a, b)] += xa * set.data.x[(row, b)];
            }
        }
    }
    for a in 0..d {
        h[(a, a)] += lambda;
        for b in 0..a {
            h[(a, b)] = h[(b, a)];
        }
    }
    h
}

/// Trains by Newton's method with Armijo backtracking (halving steps,
/// sufficient-decrease constant 1e-4) from `warm_start` (default 0). Stops
/// when ‖gradient‖∞ ≤ 1e-8·max(1, |objective|) or after 100 iterations. The
/// returned objective never exceeds the starting one.
pub fn train(set: &Instances, lambda: f64, warm_start: Option<&DVector<f64>>) -> Result<Model> {
    assert!(!set.is_empty(), "training set must be nonempty");
    assert!(lambda > 0.0, "lambda must be positive");
    let d = set.data.d();
    let mut w = match warm_start {
        Some(w0) => {
            assert_eq!(w0.len(), d, "warm start dimension mismatch");
            w0.clone()
        }
        None => DVector::zeros(d),
    };

    let mut obj = objective(&w, set, lambda);
    if !obj.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    let mut iters = 0;
    let mut converged = false;
    let mut grad_norm;

    loop {
        let g = gradient(&w, set, lambda);
        grad_norm = g.amax();
        if grad_norm <= NEWTON_TOL * obj.abs().max(1.0) {
            converged = true;
            break;
        }
        if iters >= NEWTON_MAX_ITERS {
            break;
        }

        let h = hessian(&w, set, lambda);
        let chol = h
            .cholesky()
            .ok_or(Error::Factorization("newton hessian"))?;
        let step = -chol.solve(&g);
        let slope = g.dot(&step);

        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..MAX_BACKTRACKS {
            let cand = &w + &step * t;
            let cand_obj = objective(&cand, set, lambda);
            if !cand_obj.is_finite() {
                return Err(Error::NonFiniteObjective);
            }
            if cand_obj <= obj + ARMIJO_C * t * slope {
                debug_assert!(cand_obj <= obj, "line search must not increase the objective");
                w = cand;
                obj = cand_obj;
                improved = true;
                break;
            }
            t *= BACKTRACK_FACTOR;
        }
        iters += 1;
        if !improved {
            // Numerical floor: no step length still decreases the objective.
            break;
        }
    }

    Ok(Model {
        w,
        lambda,
        converged,
        final_grad_norm: grad_norm,
        newton_iters: iters,
        final_objective: obj,
    })
}

/// P(+1 | x) for row `i` of `ds`, clamped into the open interval (0, 1).
pub fn posterior(model: &Model, ds: &Dataset, i: usize) -> f64 {
    posterior_of_margin(ds.row_dot(i, &model.w))
}

/// P(+1 | x) from the margin wᵀx, clamped into the open interval (0, 1).
pub fn posterior_of_margin(margin: f64) -> f64 {
    sigmoid(margin).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Binary entropy −p ln p − (1−p) ln(1−p) in nats.
pub fn binary_entropy(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = 1.0 - p;
    -(p * p.ln() + q * q.ln())
}

/// Fraction of test rows whose predicted sign matches the label; a margin of
/// exactly zero is classified +1.
pub fn accuracy(model: &Model, test: &Dataset) -> f64 {
    assert!(test.n() > 0, "test set must be nonempty");
    let mut hits = 0usize;
    for i in 0..test.n() {
        let pred: i8 = if test.row_dot(i, &model.w) >= 0.0 { 1 } else { -1 };
        if pred == test.y[i] {
            hits += 1;
        }
    }
    hits as f64 / test.n() as f64
}

/// Which information matrix a [`FisherMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherKind {
    /// 𝓘_𝓤: averaged over the unlabeled pool.
    Pool,
    /// 𝓘_x: a single candidate instance.
    Single,
    /// F: averaged over the labeled training set.
    Labeled,
}

/// A symmetric positive-definite information matrix σ(1−σ)-weighted second
/// moment plus λI.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub m: DMatrix<f64>,
    pub kind: FisherKind,
}

fn weighted_second_moment(
    model: &Model,
    ds: &Dataset,
    rows: &[usize],
    average: bool,
    kind: FisherKind,
) -> FisherMatrix {
    let d = ds.d();
    let mut m = DMatrix::zeros(d, d);
    for &row in rows {
        let s = posterior(model, ds, row);
        let coeff = s * (1.0 - s);
        for a in 0..d {
            let xa = coeff * ds.x[(row, a)];
            for b in a..d {
                m[(a, b)] += xa * ds.x[(row, b)];
            }
        }
    }
    if average && !rows.is_empty() {
        m /= rows.len() as f64;
    }
    for a in 0..d {
        m[(a, a)] += model.lambda;
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
    FisherMatrix { m, kind }
}

/// 𝓘_𝓤(w) = (1/|𝓤|) Σ σᵢ(1−σᵢ) xᵢxᵢᵀ + λI over the pool rows.
pub fn fisher_pool(model: &Model, ds: &Dataset, pool_rows: &[usize]) -> FisherMatrix {
    assert!(!pool_rows.is_empty(), "pool must be nonempty");
    weighted_second_moment(model, ds, pool_rows, true, FisherKind::Pool)
}

/// 𝓘_x(w) = σ(1−σ) xxᵀ + λI for a single row.
pub fn fisher_single(model: &Model, ds: &Dataset, row: usize) -> FisherMatrix {
    weighted_second_moment(model, ds, &[row], false, FisherKind::Single)
}

/// F = (1/l) Σ σᵢ(1−σᵢ) xᵢxᵢᵀ + λI over labeled rows (label-independent).
pub fn fisher_labeled(model: &Model, ds: &Dataset, labeled_rows: &[usize]) -> FisherMatrix {
    assert!(!labeled_rows.is_empty(), "labeled set must be nonempty");
    weighted_second_moment(model, ds, labeled_rows, true, FisherKind::Labeled)
}

/// Solves A·X = B for SPD A via Cholesky factorization.
pub fn solve_spd(a: &FisherMatrix, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = a
        .m
        .clone()
        .cholesky()
        .ok_or(Error::Factorization("spd solve"))?;
    Ok(chol.solve(b))
}
