//! The ten query-selection strategies.
//!
//! Every strategy is a pure function from (pool, model, params, rng) to the
//! pool index of the instance to query. Objective conventions follow the
//! benchmark: entropies are in nats, retraining strategies warm-start from
//! the current model, and ties are broken toward the lowest pool index.
//!
//! Tie-break contract: per-candidate scores are scanned in ascending pool
//! order and the incumbent is replaced only when the new score improves on
//! it by more than [`TIE_TOLERANCE`]; objectives equal within that absolute
//! tolerance therefore resolve to the lowest pool index. Oracle tests must
//! replay this exact scan.

mod aal;
mod retrain;

pub use aal::{aal_density, aal_select};
pub use retrain::{
    ceer_select, eer_select, error_reduction_components, evr_select, maxer_select, mli_select,
};

use crate::classifier::{binary_entropy, fisher_pool, fisher_single, posterior, solve_spd, Model};
use crate::data::PoolState;
use crate::error::{Error, Result};
use rand::Rng;

/// Absolute score tolerance under which two candidates count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Stable strategy identifiers, used in configs and report columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Random,
    Entropy,
    Eer,
    Maxer,
    Ceer,
    Fivr,
    Evr,
    Mli,
    Mmc,
    Aal,
}

impl Strategy {
    pub const ALL: [Strategy; 10] = [
        Strategy::Random,
        Strategy::Entropy,
        Strategy::Eer,
        Strategy::Maxer,
        Strategy::Ceer,
        Strategy::Fivr,
        Strategy::Evr,
        Strategy::Mli,
        Strategy::Mmc,
        Strategy::Aal,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Entropy => "entropy",
            Strategy::Eer => "eer",
            Strategy::Maxer => "maxer",
            Strategy::Ceer => "ceer",
            Strategy::Fivr => "fivr",
            Strategy::Evr => "evr",
            Strategy::Mli => "mli",
            Strategy::Mmc => "mmc",
            Strategy::Aal => "aal",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Error::UnknownStrategy(id.to_string()))
    }

    /// Whether the strategy retrains the classifier per candidate.
    pub fn retrains(self) -> bool {
        matches!(
            self,
            Strategy::Eer
                | Strategy::Maxer
                | Strategy::Ceer
                | Strategy::Evr
                | Strategy::Mli
                | Strategy::Aal
        )
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// How the AAL kernel bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// Median pairwise Euclidean distance over the (capped) pool.
    MedianDistance,
    Fixed(f64),
}

/// Knobs shared by the strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyParams {
    /// Regularization strength for per-candidate retrains.
    pub lambda: f64,
    /// CEER trade-off between labeled loss and pool entropy.
    pub alpha: f64,
    /// AAL uncertainty/density exponents to sweep.
    pub beta_grid: Vec<f64>,
    pub aal_kernel_bandwidth: BandwidthRule,
    /// Jitter added to the AAL kernel diagonal.
    pub aal_noise: f64,
    /// Largest pool size the AAL kernel is built over; larger pools are
    /// subsampled with the strategy's seeded generator.
    pub aal_pool_cap: usize,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            lambda: 0.01,
            alpha: 1.0,
            beta_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            aal_kernel_bandwidth: BandwidthRule::MedianDistance,
            aal_noise: 0.01,
            aal_pool_cap: 500,
        }
    }
}

impl StrategyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config("lambda must be positive and finite".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config("alpha must be nonnegative and finite".into()));
        }
        if self.beta_grid.is_empty()
            || self
                .beta_grid
                .iter()
                .any(|&b| !(b > 0.0 && b <= 1.0 && b.is_finite()))
        {
            return Err(Error::Config("beta grid values must lie in (0, 1]".into()));
        }
        if let BandwidthRule::Fixed(h) = self.aal_kernel_bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config("fixed bandwidth must be positive".into()));
            }
        }
        if !(self.aal_noise >= 0.0 && self.aal_noise.is_finite()) {
            return Err(Error::Config("aal noise must be nonnegative".into()));
        }
        if self.aal_pool_cap < 2 {
            return Err(Error::Config("aal pool cap must be at least 2".into()));
        }
        Ok(())
    }
}

/// The outcome of one selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Row index (into the training dataset) of the chosen pool member.
    pub index: usize,
    /// The strategy objective at the chosen instance (0 for random).
    pub score: f64,
    /// Audit trail: objective per pool member, parallel to the ascending
    /// unlabeled list. Strategies that only score a candidate subset leave
    /// this empty.
    pub per_candidate_scores: Option<Vec<f64>>,
}

/// Ascending scan returning the position of the best score under the
/// tie-break contract.
pub(crate) fn scan_best(scores: &[f64], minimize: bool) -> usize {
    assert!(!scores.is_empty());
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        let improves = if minimize {
            s < scores[best] - TIE_TOLERANCE
        } else {
            s > scores[best] + TIE_TOLERANCE
        };
        if improves {
            best = i;
        }
    }
    best
}

fn selection_from_scores(pool: &PoolState, scores: Vec<f64>, minimize: bool) -> Selection {
    let pos = scan_best(&scores, minimize);
    Selection {
        index: pool.unlabeled()[pos],
        score: scores[pos],
        per_candidate_scores: Some(scores),
    }
}

/// Uniformly random pool member.
pub fn random_select<R: Rng>(pool: &PoolState, rng: &mut R) -> Selection {
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");
    Selection {
        index: u[rng.random_range(0..u.len())],
        score: 0.0,
        per_candidate_scores: None,
    }
}

/// Maximum predictive entropy (uncertainty sampling).
pub fn entropy_select(pool: &PoolState, model: &Model) -> Selection {
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");
    let scores: Vec<f64> = u
        .iter()
        .map(|&i| binary_entropy(posterior(model, pool.parent, i)))
        .collect();
    selection_from_scores(pool, scores, false)
}

/// Maximum model change: 𝓜(x) = 2‖x‖ / ((1+e^(−wᵀx))(1+e^(wᵀx))).
pub fn mmc_select(pool: &PoolState, model: &Model) -> Selection {
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");
    let scores: Vec<f64> = u
        .iter()
        .map(|&i| {
            let m = pool.parent.row_dot(i, &model.w);
            2.0 * pool.parent.row_norm(i) / ((1.0 + (-m).exp()) * (1.0 + m.exp()))
        })
        .collect();
    selection_from_scores(pool, scores, false)
}

/// Minimum Fisher information ratio tr(𝓘_x⁻¹ 𝓘_𝓤) at the current model; no
/// retraining.
pub fn fivr_select(pool: &PoolState, model: &Model, _params: &StrategyParams) -> Result<Selection> {
    let u = pool.unlabeled();
    assert!(!u.is_empty(), "pool must be nonempty");
    let info_pool = fisher_pool(model, pool.parent, u);
    let mut scores = Vec::with_capacity(u.len());
    for &i in u {
        let info_x = fisher_single(model, pool.parent, i);
        let solved = solve_spd(&info_x, &info_pool.m)?;
        scores.push(solved.trace());
    }
    Ok(selection_from_scores(pool, scores, true))
}

/// Dispatches a strategy by identifier.
pub fn select<R: Rng>(
    strategy: Strategy,
    pool: &PoolState,
    model: &Model,
    params: &StrategyParams,
    rng: &mut R,
) -> Result<Selection> {
    match strategy {
        Strategy::Random => Ok(random_select(pool, rng)),
        Strategy::Entropy => Ok(entropy_select(pool, model)),
        Strategy::Eer => eer_select(pool, model, params),
        Strategy::Maxer => maxer_select(pool, model, params),
        Strategy::Ceer => ceer_select(pool, model, params),
        Strategy::Fivr => fivr_select(pool, model, params),
        Strategy::Evr => evr_select(pool, model, params),
        Strategy::Mli => mli_select(pool, model, params),
        Strategy::Mmc => Ok(mmc_select(pool, model)),
        Strategy::Aal => aal_select(pool, model, params, rng),
    }
}
