//! Strategies that retrain the classifier once per candidate and label.
//!
//! All of them share the same inner move: form 𝓛⁺ = 𝓛 ∪ {(x, y)} for a pool
//! candidate x and a hypothesized label y, retrain (warm-started from the
//! round's model), and score the retrained model. The candidate loops run
//! sequentially in ascending pool order, which realizes the tie-break
//! contract directly.

use super::{selection_from_scores, Selection, StrategyParams};
use crate::classifier::{
    binary_entropy, fisher_labeled, posterior, solve_spd, train, Instances, Model,
};
use crate::data::PoolState;
use crate::error::Result;
use nalgebra::DMatrix;

/// Scratch space for 𝓛⁺ retrains: the labeled rows plus one swap-in slot.
struct PlusTrainer<'a> {
    pool: &'a PoolState<'a>,
    lambda: f64,
    rows: Vec<usize>,
    labels: Vec<i8>,
}

impl<'a> PlusTrainer<'a> {
    fn new(pool: &'a PoolState<'a>, params: &StrategyParams) -> Self {
        let mut rows = pool.labeled().to_vec();
        let mut labels: Vec<i8> = rows.iter().map(|&i| pool.label(i)).collect();
        rows.push(usize::MAX);
        labels.push(0);
        PlusTrainer {
            pool,
            lambda: params.lambda,
            rows,
            labels,
        }
    }

    /// Retrains on 𝓛 ∪ {(candidate, y)}.
    fn retrain(&mut self, candidate: usize, y: i8, warm: Option<&Model>) -> Result<Model> {
        let last = self.rows.len() - 1;
        self.rows[last] = candidate;
        self.labels[last] = y;
        let set = Instances::new(self.pool.parent, &self.rows, &self.labels);
        train(&set, self.lambda, warm.map(|m| &m.w))
    }

    /// Negative log-likelihood of the labeled rows (𝓛⁺ as currently staged)
    /// under `model`: Σ −ln P(y_j | x_j).
    fn labeled_nll(&self, model: &Model) -> f64 {
        let mut nll = 0.0;
        for (&row, &label) in self.rows.iter().zip(&self.labels) {
            let z = f64::from(label) * self.pool.parent.row_dot(row, &model.w);
            // −ln σ(z) = log(1 + exp(−z)), evaluated in the stable form.
            nll += z.max(0.0) - z + (-z.abs()).exp().ln_1p();
        }
        nll
    }
}

/// Σ over pool rows of the predictive entropy under `model`, optionally
/// skipping one row.
fn pool_entropy(model: &Model, pool: &PoolState, exclude: Option<usize>) -> f64 {
    let mut total = 0.0;
    for &i in pool.unlabeled() {
        if exclude == Some(i) {
            continue;
        }
        total += binary_entropy(posterior(model, pool.parent, i));
    }
    total
}

/// Per-candidate ingredients shared by the expected and best-case error
/// reduction criteria: the retrained pool entropies H⁺(x, y) for both labels
/// and the current-model posterior P(+1 | x).
pub struct ErrorReductionComponents {
    /// H⁺(x, +1) and H⁺(x, −1) per pool candidate, ascending pool order.
    pub h_plus: Vec<[f64; 2]>,
    /// P(+1 | x) under the current model, same order.
    pub p_pos: Vec<f64>,
}

/// Computes the shared error-reduction ingredients; the inner entropy sum
/// ranges over all of 𝓤 including the candidate itself.
pub fn error_reduction_components(
    pool: &PoolState,
    model: &Model,
    params: &StrategyParams,
) -> Result<ErrorReductionComponents> {
    assert!(pool.labeled().len() >= 2, "need at least two labeled rows");
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");
    let mut trainer = PlusTrainer::new(pool, params);
    let mut h_plus = Vec::with_capacity(u.len());
    let mut p_pos = Vec::with_capacity(u.len());
    for &x in u {
        let mut h = [0.0; 2];
        for (slot, &y) in [1i8, -1].iter().enumerate() {
            let retrained = trainer.retrain(x, y, Some(model))?;
            h[slot] = pool_entropy(&retrained, pool, None);
        }
        h_plus.push(h);
        p_pos.push(posterior(model, pool.parent, x));
    }
    Ok(ErrorReductionComponents { h_plus, p_pos })
}

/// Expected error reduction: argmin Σ_y P(y|x) · H⁺(x, y).
pub fn eer_select(pool: &PoolState, model: &Model, params: &StrategyParams) -> Result<Selection> {
    let parts = error_reduction_components(pool, model, params)?;
    let scores: Vec<f64> = parts
        .h_plus
        .iter()
        .zip(&parts.p_pos)
        .map(|(h, &p)| p * h[0] + (1.0 - p) * h[1])
        .collect();
    Ok(selection_from_scores(pool, scores, true))
}

/// Best-case error reduction: argmin min_y H⁺(x, y).
pub fn maxer_select(pool: &PoolState, model: &Model, params: &StrategyParams) -> Result<Selection> {
    let parts = error_reduction_components(pool, model, params)?;
    let scores: Vec<f64> = parts.h_plus.iter().map(|h| h[0].min(h[1])).collect();
    Ok(selection_from_scores(pool, scores, true))
}

/// Combined error reduction: argmin min_y [labeled NLL over 𝓛⁺ plus α times
/// the retrained pool entropy over 𝓤 ∖ x].
pub fn ceer_select(pool: &PoolState, model: &Model, params: &StrategyParams) -> Result<Selection> {
    assert!(pool.labeled().len() >= 2, "need at least two labeled rows");
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");
    let mut trainer = PlusTrainer::new(pool, params);
    let mut scores = Vec::with_capacity(u.len());
    for &x in u {
        let mut best = f64::INFINITY;
        for &y in &[1i8, -1] {
            let retrained = trainer.retrain(x, y, Some(model))?;
            let value = trainer.labeled_nll(&retrained)
                + params.alpha * pool_entropy(&retrained, pool, Some(x));
            best = best.min(value);
        }
        scores.push(best);
    }
    Ok(selection_from_scores(pool, scores, true))
}

/// Expected variance reduction: argmin Σ_y P(y|x) · g(𝓛 ∪ (x,y), 𝓤) with
/// g = 2 Σ_{x_i∈𝓤} c_iᵀ F⁻¹ c_i, everything evaluated at the retrained model.
pub fn evr_select(pool: &PoolState, model: &Model, params: &StrategyParams) -> Result<Selection> {
    assert!(pool.labeled().len() >= 2, "need at least two labeled rows");
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");
    let d = pool.parent.d();
    let mut trainer = PlusTrainer::new(pool, params);
    let mut scores = Vec::with_capacity(u.len());
    let mut c = DMatrix::zeros(d, u.len());
    for &x in u {
        let mut expected = 0.0;
        let p = posterior(model, pool.parent, x);
        for &y in &[1i8, -1] {
            let retrained = trainer.retrain(x, y, Some(model))?;
            let fisher = fisher_labeled(&retrained, pool.parent, &trainer.rows);
            for (col, &i) in u.iter().enumerate() {
                let s = posterior(&retrained, pool.parent, i);
                let coeff = s * (1.0 - s);
                for row in 0..d {
                    c[(row, col)] = coeff * pool.parent.x[(i, row)];
                }
            }
            let solved = solve_spd(&fisher, &c)?;
            let g = 2.0 * solved.dot(&c);
            let weight = if y == 1 { p } else { 1.0 - p };
            expected += weight * g;
        }
        scores.push(expected);
    }
    Ok(selection_from_scores(pool, scores, true))
}

/// Minimum loss increase: argmin max_y of the retrained objective value
/// (λ/2)‖ŵ⁺‖² + Σ_{𝓛⁺} log(1 + exp(−y_i ŵ⁺ᵀx_i)).
pub fn mli_select(pool: &PoolState, model: &Model, params: &StrategyParams) -> Result<Selection> {
    assert!(pool.labeled().len() >= 2, "need at least two labeled rows");
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");
    let mut trainer = PlusTrainer::new(pool, params);
    let mut scores = Vec::with_capacity(u.len());
    for &x in u {
        let mut worst = f64::NEG_INFINITY;
        for &y in &[1i8, -1] {
            let retrained = trainer.retrain(x, y, Some(model))?;
            worst = worst.max(retrained.final_objective);
        }
        scores.push(worst);
    }
    Ok(selection_from_scores(pool, scores, true))
}

/// The expected-error-reduction objective for a single candidate, used by
/// the adaptive strategy's tie-break. The entropy sum ranges over the full
/// pool including the candidate.
pub(super) fn eer_objective_for_candidate(
    pool: &PoolState,
    model: &Model,
    params: &StrategyParams,
    candidate: usize,
) -> Result<f64> {
    let mut trainer = PlusTrainer::new(pool, params);
    let p = posterior(model, pool.parent, candidate);
    let mut value = 0.0;
    for &y in &[1i8, -1] {
        let retrained = trainer.retrain(candidate, y, Some(model))?;
        let weight = if y == 1 { p } else { 1.0 - p };
        value += weight * pool_entropy(&retrained, pool, None);
    }
    Ok(value)
}
