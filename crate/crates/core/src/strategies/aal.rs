//! Adaptive active learning: a β-weighted blend of predictive uncertainty
//! and a Gaussian-process information density, tie-broken by the expected
//! error reduction objective.
//!
//! The density of a pool point is the mutual information between the point
//! and the rest of the pool under a GP prior with an RBF kernel:
//! d(x_i) = ½ log( K_ii / σ²_{i|rest} ) where σ²_{i|rest} = 1/[K⁻¹]_ii is
//! the conditional variance given every other point. Pools larger than the
//! configured cap are subsampled (seeded) before the O(m³) kernel solve.

use super::retrain::eer_objective_for_candidate;
use super::{scan_best, BandwidthRule, Selection, StrategyParams};
use crate::classifier::{binary_entropy, posterior, Model};
use crate::data::{Dataset, PoolState};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;

/// Information density for every pool member, ascending pool order.
///
/// This is the uncapped form used when the whole pool fits the kernel
/// budget; the selection path applies the pool cap first.
pub fn aal_density(pool: &PoolState, params: &StrategyParams) -> Result<Vec<f64>> {
    density_of_rows(pool.parent, pool.unlabeled(), params)
}

fn density_of_rows(ds: &Dataset, rows: &[usize], params: &StrategyParams) -> Result<Vec<f64>> {
    let m = rows.len();
    assert!(m >= 2, "density needs at least two pool points");

    let h = match params.aal_kernel_bandwidth {
        BandwidthRule::Fixed(h) => h,
        BandwidthRule::MedianDistance => {
            let mut dists = Vec::with_capacity(m * (m - 1) / 2);
            for a in 0..m {
                for b in (a + 1)..m {
                    dists.push(ds.row_dist_sq(rows[a], rows[b]).sqrt());
                }
            }
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mid = dists.len() / 2;
            let med = if dists.len() % 2 == 1 {
                dists[mid]
            } else {
                0.5 * (dists[mid - 1] + dists[mid])
            };
            // All-identical points give a zero median; any positive value
            // works then because every squared distance is zero.
            if med > 0.0 {
                med
            } else {
                1.0
            }
        }
    };

    let mut k = DMatrix::zeros(m, m);
    for a in 0..m {
        k[(a, a)] = 1.0 + params.aal_noise;
        for b in (a + 1)..m {
            let v = (-ds.row_dist_sq(rows[a], rows[b]) / (2.0 * h * h)).exp();
            k[(a, b)] = v;
            k[(b, a)] = v;
        }
    }
    let inv = k
        .clone()
        .cholesky()
        .ok_or(Error::Factorization("aal kernel"))?
        .inverse();
    let k_diag = 1.0 + params.aal_noise;
    Ok((0..m)
        .map(|i| (0.5 * (k_diag * inv[(i, i)]).ln()).max(0.0))
        .collect())
}

/// h_β(x) = u(x)^β · d(x)^(1−β), with 0^β defined as 0 for the uncertainty
/// factor: a perfectly confident point is never a candidate.
fn blend(u: f64, d: f64, beta: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.powf(beta) * d.powf(1.0 - beta)
    }
}

/// Adaptive selection: sweep the β grid over blended uncertainty/density
/// scores, deduplicate the per-β winners, and pick the candidate with the
/// lowest expected-error-reduction objective over the full pool.
pub fn aal_select<R: Rng>(
    pool: &PoolState,
    model: &Model,
    params: &StrategyParams,
    rng: &mut R,
) -> Result<Selection> {
    assert!(pool.labeled().len() >= 2, "need at least two labeled rows");
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");

    if u.len() == 1 {
        let only = u[0];
        let score = eer_objective_for_candidate(pool, model, params, only)?;
        return Ok(Selection {
            index: only,
            score,
            per_candidate_scores: None,
        });
    }

    // Cap the pool for the kernel solve; the subsample stays in ascending
    // order so tie-breaking still favors the lowest pool index.
    let capped: Vec<usize> = if u.len() <= params.aal_pool_cap {
        u.to_vec()
    } else {
        let mut picks: Vec<usize> = rand::seq::index::sample(rng, u.len(), params.aal_pool_cap)
            .into_iter()
            .map(|k| u[k])
            .collect();
        picks.sort_unstable();
        picks
    };

    let uncertainty: Vec<f64> = capped
        .iter()
        .map(|&i| binary_entropy(posterior(model, pool.parent, i)))
        .collect();
    let density = density_of_rows(pool.parent, &capped, params)?;

    let mut candidates: Vec<usize> = params
        .beta_grid
        .iter()
        .map(|&beta| {
            let scores: Vec<f64> = uncertainty
                .iter()
                .zip(&density)
                .map(|(&u, &d)| blend(u, d, beta))
                .collect();
            capped[scan_best(&scores, false)]
        })
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    let scores: Vec<f64> = candidates
        .iter()
        .map(|&c| eer_objective_for_candidate(pool, model, params, c))
        .collect::<Result<_>>()?;
    let pos = scan_best(&scores, true);
    Ok(Selection {
        index: candidates[pos],
        score: scores[pos],
        per_candidate_scores: None,
    })
}
