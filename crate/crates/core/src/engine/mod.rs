//! Benchmark engine: seeded trial execution, the accuracy/ALC reduction,
//! and the cross-strategy comparison table.
//!
//! Every random decision draws from a generator seeded by hashing the
//! master seed with the decision's purpose, so a given (dataset, rep) pair
//! sees the same regenerated data, train/test split, and initial labels no
//! matter which strategy runs, how many worker threads are active, or in
//! what order cells complete. Timing fields are the only non-deterministic
//! outputs.

mod report;

pub use report::{
    learning_curves, write_curves, write_reports, CurveRow, DETERMINISTIC_REPORTS,
    TIMING_REPORTS,
};

use crate::classifier::{accuracy, train, Instances};
use crate::data::{
    gen_synth1, gen_synth2, gen_synth3, seed_initial_labels, split_half, Dataset, PoolState,
};
use crate::error::{Error, Result};
use crate::stats::paired_ttest;
use crate::strategies::{select, Strategy, StrategyParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Where a dataset's instances come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Two-Gaussian synthetic problem, regenerated each repetition.
    Synth1 { n_per_class: usize },
    /// Multi-cluster synthetic problem with deceptive corner structure.
    Synth2 { n_per_class: usize },
    /// Interlocked-arms synthetic problem.
    Synth3 { n_per_class: usize },
    /// A fixed dataset loaded from disk; only the split varies per rep.
    Fixed(Dataset),
}

impl DataSource {
    pub fn is_synthetic(&self) -> bool {
        !matches!(self, DataSource::Fixed(_))
    }
}

/// One dataset entry in a benchmark run.
#[derive(Debug, Clone)]
pub struct DatasetJob {
    /// Unique name; feeds seed derivation and report rows.
    pub name: String,
    pub source: DataSource,
    /// Number of repetitions.
    pub reps: usize,
}

/// Run-wide settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Queries per trial.
    pub budget: usize,
    pub params: StrategyParams,
    pub strategies: Vec<Strategy>,
    pub master_seed: u64,
    /// Record the accuracy of the model trained on just the two seed
    /// labels as a round-0 entry.
    pub eval_initial_round: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            budget: 40,
            params: StrategyParams::default(),
            strategies: Strategy::ALL.to_vec(),
            master_seed: 42,
            eval_initial_round: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return Err(Error::Config(format!("duplicate strategy '{s}'")));
            }
        }
        self.params.validate()
    }
}

/// One query made during a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    /// 1-based round number.
    pub round: usize,
    /// Row index into the trial's training dataset.
    pub pool_index: usize,
    /// Feature coordinates, recorded for two-dimensional data.
    pub location: Option<[f64; 2]>,
}

/// Everything measured in one (dataset, strategy, rep) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Accuracy of the untouched seed model, when requested.
    pub round0_accuracy: Option<f64>,
    /// Test accuracy after each of the B queries.
    pub accuracies: Vec<f64>,
    pub queries: Vec<QueryRecord>,
    /// Wall-clock seconds spent inside the strategy per round; excludes the
    /// post-query evaluation retrain.
    pub select_seconds: Vec<f64>,
    /// The two seeded labeled rows, ascending.
    pub initial_labeled: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub dataset: String,
    pub strategy: Strategy,
    pub rep: usize,
    pub result: TrialResult,
}

/// All trials of a run in canonical (dataset name, strategy id, rep) order.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResults {
    pub trials: Vec<TrialRecord>,
}

/// Area under the learning curve: the arithmetic mean of the post-query
/// accuracies, rounds 1 through B. The optional round-0 entry is excluded.
pub fn alc(result: &TrialResult) -> f64 {
    let b = result.accuracies.len();
    assert!(b > 0, "trial has no rounds");
    result.accuracies.iter().sum::<f64>() / b as f64
}

/// Hashes the master seed with a decision path into a stream seed (FNV-1a).
pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for byte in master.to_le_bytes() {
        h = (h ^ u64::from(byte)).wrapping_mul(PRIME);
    }
    for part in parts {
        for &byte in part.as_bytes() {
            h = (h ^ u64::from(byte)).wrapping_mul(PRIME);
        }
        // Separator so part boundaries can't alias.
        h = (h ^ 0xff).wrapping_mul(PRIME);
    }
    h
}

/// The strategy-independent environment of one (dataset, rep) cell: the
/// materialized data, its train/test split, and the two seed labels.
pub struct CellEnv {
    pub train: Dataset,
    pub test: Dataset,
    pub initial_labeled: Vec<usize>,
}

pub fn cell_environment(job: &DatasetJob, master_seed: u64, rep: usize) -> Result<CellEnv> {
    let rep_s = rep.to_string();
    let base = match &job.source {
        DataSource::Fixed(ds) => ds.clone(),
        synth => {
            let seed = derive_seed(master_seed, &["regen", &job.name, &rep_s]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match synth {
                DataSource::Synth1 { n_per_class } => gen_synth1(*n_per_class, &mut rng),
                DataSource::Synth2 { n_per_class } => gen_synth2(*n_per_class, &mut rng),
                DataSource::Synth3 { n_per_class } => gen_synth3(*n_per_class, &mut rng),
                DataSource::Fixed(_) => unreachable!(),
            }
        }
    };
    let split_seed = derive_seed(master_seed, &["split", &job.name, &rep_s]);
    let (train, test) = split_half(&base, &mut ChaCha8Rng::seed_from_u64(split_seed))?;
    let init_seed = derive_seed(master_seed, &["init", &job.name, &rep_s]);
    let pool = seed_initial_labels(&train, &mut ChaCha8Rng::seed_from_u64(init_seed));
    let initial_labeled = pool.labeled().to_vec();
    drop(pool);
    Ok(CellEnv {
        train,
        test,
        initial_labeled,
    })
}

/// Per-trial settings shared by every cell.
#[derive(Debug, Clone)]
pub struct TrialSettings {
    pub budget: usize,
    pub params: StrategyParams,
    pub eval_initial_round: bool,
}

/// Runs the query loop of one cell.
///
/// Each round trains on the current labels (warm-started), times the
/// strategy's selection, moves the chosen row to the labeled set, retrains,
/// and records test accuracy. The evaluation retrain doubles as the next
/// round's selection model.
pub fn run_trial(
    train_ds: &Dataset,
    test_ds: &Dataset,
    strategy: Strategy,
    initial_labeled: &[usize],
    settings: &TrialSettings,
    select_seed: u64,
) -> Result<TrialResult> {
    let pool_size = train_ds.n() - initial_labeled.len();
    if settings.budget > pool_size {
        return Err(Error::PoolExhausted {
            budget: settings.budget,
            pool: pool_size,
        });
    }

    let mut pool = PoolState::new(train_ds, initial_labeled.to_vec());
    let mut rng = ChaCha8Rng::seed_from_u64(select_seed);

    let mut labels: Vec<i8> = pool.labeled().iter().map(|&i| pool.label(i)).collect();
    let mut model = train(
        &Instances::new(train_ds, pool.labeled(), &labels),
        settings.params.lambda,
        None,
    )?;
    let round0_accuracy = settings
        .eval_initial_round
        .then(|| accuracy(&model, test_ds));

    let record_location = train_ds.d() == 2;
    let mut accuracies = Vec::with_capacity(settings.budget);
    let mut queries = Vec::with_capacity(settings.budget);
    let mut select_seconds = Vec::with_capacity(settings.budget);

    for round in 1..=settings.budget {
        let started = Instant::now();
        let sel = select(strategy, &pool, &model, &settings.params, &mut rng)?;
        select_seconds.push(started.elapsed().as_secs_f64());

        let location = record_location
            .then(|| [train_ds.x[(sel.index, 0)], train_ds.x[(sel.index, 1)]]);
        pool.query(sel.index);
        queries.push(QueryRecord {
            round,
            pool_index: sel.index,
            location,
        });

        labels = pool.labeled().iter().map(|&i| pool.label(i)).collect();
        model = train(
            &Instances::new(train_ds, pool.labeled(), &labels),
            settings.params.lambda,
            Some(&model.w),
        )?;
        accuracies.push(accuracy(&model, test_ds));
    }

    Ok(TrialResult {
        round0_accuracy,
        accuracies,
        queries,
        select_seconds,
        initial_labeled: initial_labeled.to_vec(),
    })
}

/// Runs the full benchmark grid in parallel.
///
/// Cells are independent; results are reduced in canonical (dataset name,
/// strategy id, rep) order regardless of scheduling, so output is
/// byte-identical across worker counts.
pub fn run(jobs: &[DatasetJob], cfg: &ExperimentConfig) -> Result<BenchResults> {
    cfg.validate()?;
    if jobs.is_empty() {
        return Err(Error::Config("at least one dataset is required".into()));
    }
    for (i, job) in jobs.iter().enumerate() {
        if job.reps == 0 {
            return Err(Error::Config(format!(
                "dataset '{}' must have at least one rep",
                job.name
            )));
        }
        if jobs[..i].iter().any(|j| j.name == job.name) {
            return Err(Error::Config(format!("duplicate dataset name '{}'", job.name)));
        }
    }

    let settings = TrialSettings {
        budget: cfg.budget,
        params: cfg.params.clone(),
        eval_initial_round: cfg.eval_initial_round,
    };

    let mut cells: Vec<(usize, Strategy, usize)> = Vec::new();
    for (j, job) in jobs.iter().enumerate() {
        for &s in &cfg.strategies {
            for rep in 0..job.reps {
                cells.push((j, s, rep));
            }
        }
    }
    cells.sort_by(|a, b| {
        (jobs[a.0].name.as_str(), a.1.id(), a.2).cmp(&(jobs[b.0].name.as_str(), b.1.id(), b.2))
    });

    let outcomes: Vec<Result<TrialRecord>> = cells
        .par_iter()
        .map(|&(j, strategy, rep)| {
            let job = &jobs[j];
            let env = cell_environment(job, cfg.master_seed, rep)?;
            let select_seed = derive_seed(
                cfg.master_seed,
                &["select", &job.name, strategy.id(), &rep.to_string()],
            );
            let result = run_trial(
                &env.train,
                &env.test,
                strategy,
                &env.initial_labeled,
                &settings,
                select_seed,
            )?;
            Ok(TrialRecord {
                dataset: job.name.clone(),
                strategy,
                rep,
                result,
            })
        })
        .collect();

    let mut trials = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        trials.push(outcome?);
    }
    Ok(BenchResults { trials })
}

/// The cross-strategy summary in the shape of the benchmark's comparison
/// table: mean ALC per dataset plus the aggregate rows.
#[derive(Debug, Clone)]
pub struct ComparisonTable {
    /// Column order.
    pub strategies: Vec<Strategy>,
    /// Row order (canonical: sorted names).
    pub datasets: Vec<String>,
    /// Mean ALC, indexed [dataset][strategy].
    pub mean_alc: Vec<Vec<f64>>,
    /// mean ALC of the strategy / mean ALC of random, per dataset.
    pub ratio_vs_random: Vec<Vec<f64>>,
    /// Mean of the per-dataset mean ALCs, per strategy.
    pub mean_over_datasets: Vec<f64>,
    /// Average of per-dataset ranks (1 = best; exact ties share the
    /// average of their positions).
    pub average_rank: Vec<f64>,
    /// Datasets where the strategy is the best or statistically
    /// indistinguishable from it (paired t-test, 95%).
    pub win_counts: Vec<usize>,
    /// Significant-win / tie / significant-loss counts against random.
    pub wtl_vs_random: Vec<(usize, usize, usize)>,
    /// Per-rep ALC samples, indexed [dataset][strategy][rep].
    pub alc_samples: Vec<Vec<Vec<f64>>>,
}

impl ComparisonTable {
    pub fn strategy_column(&self, s: Strategy) -> Option<usize> {
        self.strategies.iter().position(|&t| t == s)
    }

    pub fn dataset_row(&self, name: &str) -> Option<usize> {
        self.datasets.iter().position(|d| d == name)
    }
}

/// Builds the comparison table. Requires the random baseline and identical
/// rep counts across strategies within each dataset.
pub fn summarize(results: &BenchResults) -> Result<ComparisonTable> {
    if results.trials.is_empty() {
        return Err(Error::Config("no trials to summarize".into()));
    }

    let mut datasets: Vec<String> = Vec::new();
    for t in &results.trials {
        if !datasets.contains(&t.dataset) {
            datasets.push(t.dataset.clone());
        }
    }
    datasets.sort();
    let strategies: Vec<Strategy> = Strategy::ALL
        .into_iter()
        .filter(|s| results.trials.iter().any(|t| t.strategy == *s))
        .collect();
    let random_col = strategies
        .iter()
        .position(|&s| s == Strategy::Random)
        .ok_or_else(|| Error::Config("summary requires the random baseline".into()))?;

    let mut alc_samples: Vec<Vec<Vec<f64>>> =
        vec![vec![Vec::new(); strategies.len()]; datasets.len()];
    for t in &results.trials {
        let d = datasets.iter().position(|n| *n == t.dataset).unwrap();
        let s = strategies.iter().position(|&x| x == t.strategy).unwrap();
        alc_samples[d][s].push(alc(&t.result));
    }
    for (d, per_strategy) in alc_samples.iter().enumerate() {
        let reps = per_strategy[0].len();
        if per_strategy.iter().any(|v| v.len() != reps) {
            return Err(Error::Config(format!(
                "dataset '{}' has unpaired rep counts across strategies",
                datasets[d]
            )));
        }
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_alc: Vec<Vec<f64>> = alc_samples
        .iter()
        .map(|row| row.iter().map(|v| mean(v)).collect())
        .collect();

    let ratio_vs_random: Vec<Vec<f64>> = mean_alc
        .iter()
        .map(|row| {
            let base = row[random_col];
            row.iter().map(|&m| m / base).collect()
        })
        .collect();

    let mean_over_datasets: Vec<f64> = (0..strategies.len())
        .map(|s| mean(&mean_alc.iter().map(|row| row[s]).collect::<Vec<_>>()))
        .collect();

    // Rank 1 is the highest mean ALC; exact ties share the average of the
    // positions they occupy.
    let mut average_rank = vec![0.0; strategies.len()];
    for row in &mean_alc {
        for (s, &m) in row.iter().enumerate() {
            let better = row.iter().filter(|&&o| o > m).count();
            let equal = row.iter().filter(|&&o| o == m).count();
            average_rank[s] += better as f64 + (equal as f64 + 1.0) / 2.0;
        }
    }
    for r in &mut average_rank {
        *r /= datasets.len() as f64;
    }

    // Significance helper: Some(true) when a beats b at 95%, Some(false)
    // when b beats a, None when indistinguishable (or untestable).
    let compare = |a: &[f64], b: &[f64]| -> Option<bool> {
        if a.len() < 2 {
            return None;
        }
        let res = paired_ttest(a, b);
        res.significant_95.then(|| res.t > 0.0)
    };

    let mut win_counts = vec![0usize; strategies.len()];
    let mut wtl_vs_random = vec![(0usize, 0usize, 0usize); strategies.len()];
    for (d, row) in mean_alc.iter().enumerate() {
        let mut best = 0;
        for s in 1..row.len() {
            if row[s] > row[best] {
                best = s;
            }
        }
        for s in 0..strategies.len() {
            if s == best || compare(&alc_samples[d][best], &alc_samples[d][s]) != Some(true) {
                win_counts[s] += 1;
            }
            match compare(&alc_samples[d][s], &alc_samples[d][random_col]) {
                Some(true) => wtl_vs_random[s].0 += 1,
                None => wtl_vs_random[s].1 += 1,
                Some(false) => wtl_vs_random[s].2 += 1,
            }
        }
    }

    Ok(ComparisonTable {
        strategies,
        datasets,
        mean_alc,
        ratio_vs_random,
        mean_over_datasets,
        average_rank,
        win_counts,
        wtl_vs_random,
        alc_samples,
    })
}

/// Mean wall-clock selection seconds per trial for every (dataset,
/// strategy) cell, in canonical order.
#[derive(Debug, Clone)]
pub struct TimingRow {
    pub dataset: String,
    pub strategy: Strategy,
    pub mean_select_seconds: f64,
}

pub fn timing_report(results: &BenchResults) -> Vec<TimingRow> {
    let mut rows: Vec<TimingRow> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for t in &results.trials {
        let total: f64 = t.result.select_seconds.iter().sum();
        match rows
            .iter_mut()
            .zip(&mut counts)
            .find(|(r, _)| r.dataset == t.dataset && r.strategy == t.strategy)
        {
            Some((row, c)) => {
                row.mean_select_seconds += total;
                *c += 1;
            }
            None => {
                rows.push(TimingRow {
                    dataset: t.dataset.clone(),
                    strategy: t.strategy,
                    mean_select_seconds: total,
                });
                counts.push(1);
            }
        }
    }
    for (row, c) in rows.iter_mut().zip(&counts) {
        row.mean_select_seconds /= *c as f64;
    }
    rows
}
