//! CSV reports for a benchmark run.
//!
//! Every writer emits rows in the canonical trial order, with floats in
//! Rust's shortest round-trip formatting, so a re-run with the same master
//! seed produces byte-identical files. The two timing reports are the
//! exception: they record wall-clock measurements.

use super::{alc, timing_report, BenchResults, ComparisonTable};
use crate::error::{Error, Result};
use crate::strategies::Strategy;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Report files whose bytes depend only on the manifest and master seed.
pub const DETERMINISTIC_REPORTS: &[&str] = &[
    "trials.csv",
    "accuracies.csv",
    "queries.csv",
    "summary.csv",
    "ratios.csv",
];

/// Report files carrying wall-clock measurements.
pub const TIMING_REPORTS: &[&str] = &["trial_timing.csv", "timing.csv"];

fn with_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
{
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_trials_csv(results: &BenchResults, path: &Path) -> Result<()> {
    with_file(path, |w| {
        writeln!(w, "dataset,strategy,rep,alc")?;
        for t in &results.trials {
            writeln!(w, "{},{},{},{}", t.dataset, t.strategy.id(), t.rep, alc(&t.result))?;
        }
        Ok(())
    })
}

pub fn write_accuracies_csv(results: &BenchResults, path: &Path) -> Result<()> {
    with_file(path, |w| {
        writeln!(w, "dataset,strategy,rep,round,accuracy")?;
        for t in &results.trials {
            if let Some(a0) = t.result.round0_accuracy {
                writeln!(w, "{},{},{},0,{}", t.dataset, t.strategy.id(), t.rep, a0)?;
            }
            for (i, a) in t.result.accuracies.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    t.dataset,
                    t.strategy.id(),
                    t.rep,
                    i + 1,
                    a
                )?;
            }
        }
        Ok(())
    })
}

pub fn write_queries_csv(results: &BenchResults, path: &Path) -> Result<()> {
    with_file(path, |w| {
        writeln!(w, "dataset,strategy,rep,round,pool_index,x0,x1")?;
        for t in &results.trials {
            for q in &t.result.queries {
                match q.location {
                    Some([x0, x1]) => writeln!(
                        w,
                        "{},{},{},{},{},{},{}",
                        t.dataset,
                        t.strategy.id(),
                        t.rep,
                        q.round,
                        q.pool_index,
                        x0,
                        x1
                    )?,
                    None => writeln!(
                        w,
                        "{},{},{},{},{},,",
                        t.dataset,
                        t.strategy.id(),
                        t.rep,
                        q.round,
                        q.pool_index
                    )?,
                }
            }
        }
        Ok(())
    })
}

/// The comparison table in one file: a mean-ALC row per dataset followed by
/// the aggregate rows (mean, average rank, win counts, win/tie/loss against
/// random).
pub fn write_summary_csv(table: &ComparisonTable, path: &Path) -> Result<()> {
    with_file(path, |w| {
        write!(w, "dataset")?;
        for s in &table.strategies {
            write!(w, ",{}", s.id())?;
        }
        writeln!(w)?;
        for (d, name) in table.datasets.iter().enumerate() {
            write!(w, "{name}")?;
            for s in 0..table.strategies.len() {
                write!(w, ",{}", table.mean_alc[d][s])?;
            }
            writeln!(w)?;
        }
        write!(w, "mean")?;
        for m in &table.mean_over_datasets {
            write!(w, ",{m}")?;
        }
        writeln!(w)?;
        write!(w, "avg_rank")?;
        for r in &table.average_rank {
            write!(w, ",{r}")?;
        }
        writeln!(w)?;
        write!(w, "win_count")?;
        for c in &table.win_counts {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        write!(w, "wtl_vs_random")?;
        for (win, tie, loss) in &table.wtl_vs_random {
            write!(w, ",{win}/{tie}/{loss}")?;
        }
        writeln!(w)?;
        Ok(())
    })
}

pub fn write_ratios_csv(table: &ComparisonTable, path: &Path) -> Result<()> {
    with_file(path, |w| {
        writeln!(w, "dataset,strategy,ratio_vs_random")?;
        for (d, name) in table.datasets.iter().enumerate() {
            for (s, strategy) in table.strategies.iter().enumerate() {
                writeln!(w, "{},{},{}", name, strategy.id(), table.ratio_vs_random[d][s])?;
            }
        }
        Ok(())
    })
}

pub fn write_trial_timing_csv(results: &BenchResults, path: &Path) -> Result<()> {
    with_file(path, |w| {
        writeln!(w, "dataset,strategy,rep,select_seconds_total")?;
        for t in &results.trials {
            let total: f64 = t.result.select_seconds.iter().sum();
            writeln!(w, "{},{},{},{}", t.dataset, t.strategy.id(), t.rep, total)?;
        }
        Ok(())
    })
}

pub fn write_timing_csv(results: &BenchResults, path: &Path) -> Result<()> {
    let rows = timing_report(results);
    with_file(path, |w| {
        writeln!(w, "dataset,strategy,mean_select_seconds")?;
        for r in &rows {
            writeln!(w, "{},{},{}", r.dataset, r.strategy.id(), r.mean_select_seconds)?;
        }
        Ok(())
    })
}

/// Writes the full report set into `dir` (created if missing).
pub fn write_reports(results: &BenchResults, table: &ComparisonTable, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_trials_csv(results, &dir.join("trials.csv"))?;
    write_accuracies_csv(results, &dir.join("accuracies.csv"))?;
    write_queries_csv(results, &dir.join("queries.csv"))?;
    write_summary_csv(table, &dir.join("summary.csv"))?;
    write_ratios_csv(table, &dir.join("ratios.csv"))?;
    write_trial_timing_csv(results, &dir.join("trial_timing.csv"))?;
    write_timing_csv(results, &dir.join("timing.csv"))?;
    Ok(())
}

/// One learning-curve point: accuracy statistics over reps at one round.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub dataset: String,
    pub round: usize,
    pub strategy: Strategy,
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
}

/// Linear-interpolation quantile of an ascending sample.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-round accuracy mean and 5%/95% quantiles across reps, for every
/// (dataset, strategy) pair, in canonical order. A round-0 row appears when
/// trials recorded the seed model's accuracy.
pub fn learning_curves(results: &BenchResults) -> Vec<CurveRow> {
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

    let mut rows = Vec::new();
    for name in &datasets {
        for &strategy in &strategies {
            // Bucket accuracies per round across reps.
            let mut per_round: Vec<(usize, Vec<f64>)> = Vec::new();
            for t in results
                .trials
                .iter()
                .filter(|t| t.dataset == *name && t.strategy == strategy)
            {
                if let Some(a0) = t.result.round0_accuracy {
                    bucket(&mut per_round, 0, a0);
                }
                for (i, &a) in t.result.accuracies.iter().enumerate() {
                    bucket(&mut per_round, i + 1, a);
                }
            }
            per_round.sort_by_key(|(round, _)| *round);
            for (round, mut samples) in per_round {
                let mean = samples.iter().sum::<f64>() / samples.len() as f64;
                samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
                rows.push(CurveRow {
                    dataset: name.clone(),
                    round,
                    strategy,
                    mean,
                    q05: quantile(&samples, 0.05),
                    q95: quantile(&samples, 0.95),
                });
            }
        }
    }
    rows
}

fn bucket(per_round: &mut Vec<(usize, Vec<f64>)>, round: usize, value: f64) {
    match per_round.iter_mut().find(|(r, _)| *r == round) {
        Some((_, v)) => v.push(value),
        None => per_round.push((round, vec![value])),
    }
}

/// Writes one `<dataset>.csv` learning-curve file per dataset into
/// `dir/curves/`.
pub fn write_curves(results: &BenchResults, dir: &Path) -> Result<()> {
    let curves_dir = dir.join("curves");
    fs::create_dir_all(&curves_dir).map_err(|e| Error::io(&curves_dir, e))?;
    let rows = learning_curves(results);
    let mut datasets: Vec<&str> = Vec::new();
    for r in &rows {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
    }
    for name in datasets {
        let path = curves_dir.join(format!("{name}.csv"));
        with_file(&path, |w| {
            writeln!(w, "round,strategy,mean,q05,q95")?;
            // Round-major so curves over strategies align per round.
            let mut of_dataset: Vec<&CurveRow> =
                rows.iter().filter(|r| r.dataset == name).collect();
            of_dataset.sort_by_key(|r| r.round);
            for r in of_dataset {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    r.round,
                    r.strategy.id(),
                    r.mean,
                    r.q05,
                    r.q95
                )?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{TrialRecord, TrialResult};
    use super::*;

    fn fake(dataset: &str, strategy: Strategy, rep: usize, accs: &[f64], a0: Option<f64>) -> TrialRecord {
        TrialRecord {
            dataset: dataset.into(),
            strategy,
            rep,
            result: TrialResult {
                round0_accuracy: a0,
                accuracies: accs.to_vec(),
                queries: vec![],
                select_seconds: vec![0.5; accs.len()],
                initial_labeled: vec![0, 1],
            },
        }
    }

    #[test]
    fn quantile_hand_values() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile(&v, 0.05) - 1.15).abs() < 1e-12);
        assert!((quantile(&v, 0.95) - 3.85).abs() < 1e-12);
        assert!((quantile(&v, 0.5) - 2.5).abs() < 1e-12);
        assert_eq!(quantile(&[7.0], 0.05), 7.0);
    }

    #[test]
    fn curves_aggregate_over_reps() {
        let results = BenchResults {
            trials: vec![
                fake("a", Strategy::Random, 0, &[0.5, 0.6], Some(0.4)),
                fake("a", Strategy::Random, 1, &[0.7, 0.8], Some(0.4)),
            ],
        };
        let rows = learning_curves(&results);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].round, 0);
        assert_eq!(rows[0].mean, 0.4);
        assert_eq!(rows[0].q05, rows[0].q95);
        assert_eq!(rows[1].round, 1);
        assert!((rows[1].mean - 0.6).abs() < 1e-15);
        assert!((rows[1].q05 - (0.5 + 0.05 * 0.2)).abs() < 1e-12);
        assert!((rows[1].q95 - (0.5 + 0.95 * 0.2)).abs() < 1e-12);
        assert_eq!(rows[2].round, 2);
    }

    #[test]
    fn reports_are_deterministic_files() {
        use super::super::summarize;
        let results = BenchResults {
            trials: vec![
                fake("a", Strategy::Random, 0, &[0.5, 0.6], None),
                fake("a", Strategy::Random, 1, &[0.55, 0.65], None),
                fake("a", Strategy::Entropy, 0, &[0.7, 0.8], None),
                fake("a", Strategy::Entropy, 1, &[0.75, 0.85], None),
            ],
        };
        let table = summarize(&results).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let d1 = dir.path().join("one");
        let d2 = dir.path().join("two");
        write_reports(&results, &table, &d1).unwrap();
        write_reports(&results, &table, &d2).unwrap();
        write_curves(&results, &d1).unwrap();
        write_curves(&results, &d2).unwrap();
        for name in DETERMINISTIC_REPORTS {
            let a = fs::read(d1.join(name)).unwrap();
            let b = fs::read(d2.join(name)).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, b, "{name} must be byte-identical");
        }
        for name in TIMING_REPORTS {
            assert!(d1.join(name).exists());
        }
        let c1 = fs::read(d1.join("curves/a.csv")).unwrap();
        let c2 = fs::read(d2.join("curves/a.csv")).unwrap();
        assert_eq!(c1, c2);
        let head = String::from_utf8(c1).unwrap();
        assert!(head.starts_with("round,strategy,mean,q05,q95\n"));
        let summary = fs::read_to_string(d1.join("summary.csv")).unwrap();
        assert!(summary.starts_with("dataset,random,entropy\n"));
        assert!(summary.contains("\nwin_count,"));
        assert!(summary.contains("\nwtl_vs_random,"));
        let trials = fs::read_to_string(d1.join("trials.csv")).unwrap();
        assert!(trials.starts_with("dataset,strategy,rep,alc\n"));
        assert!(trials.contains("a,random,0,0.55"));
    }
}
