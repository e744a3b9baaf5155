//! The three subcommands: bench, prefmap, and curves.

use crate::config::{
    build_jobs, data_root, experiment_config, resolve_config, write_manifest, FileConfig,
    Overrides,
};
use albench_core::engine::{
    run, summarize, write_curves, write_reports, BenchResults, ComparisonTable, QueryRecord,
    TrialRecord, TrialResult,
};
use albench_core::prefmap::{
    collect_locations, kde_grid, write_prefmap_csv, write_prefmap_pgm, GridSpec, WeightScheme,
};
use albench_core::strategies::Strategy;
use albench_core::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub struct BenchArgs {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Overrides,
}

pub fn cmd_bench(args: BenchArgs) -> Result<()> {
    let cfg = resolve_config(args.config.as_deref(), &args.overrides)?;
    let root = data_root(args.config.as_deref());
    let jobs = build_jobs(&cfg, &root)?;
    let engine_cfg = experiment_config(&cfg)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    write_manifest(&cfg, &args.out)?;

    let results = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| run(&jobs, &engine_cfg))?
    } else {
        run(&jobs, &engine_cfg)?
    };

    let table = summarize(&results)?;
    write_reports(&results, &table, &args.out)?;
    print_summary(&table);
    println!(
        "wrote {} trials to {}",
        results.trials.len(),
        args.out.display()
    );
    Ok(())
}

fn print_summary(table: &ComparisonTable) {
    print!("{:<12}", "dataset");
    for s in &table.strategies {
        print!(" {:>8}", s.id());
    }
    println!();
    for (d, name) in table.datasets.iter().enumerate() {
        print!("{name:<12}");
        for s in 0..table.strategies.len() {
            print!(" {:>8.4}", table.mean_alc[d][s]);
        }
        println!();
    }
    print!("{:<12}", "mean");
    for m in &table.mean_over_datasets {
        print!(" {m:>8.4}");
    }
    println!();
    print!("{:<12}", "avg_rank");
    for r in &table.average_rank {
        print!(" {r:>8.2}");
    }
    println!();
    print!("{:<12}", "win_count");
    for c in &table.win_counts {
        print!(" {c:>8}");
    }
    println!();
    print!("{:<12}", "w/t/l");
    for (w, t, l) in &table.wtl_vs_random {
        print!(" {:>8}", format!("{w}/{t}/{l}"));
    }
    println!();
}

pub struct PrefmapArgs {
    pub run: PathBuf,
    pub dataset: Option<String>,
    pub strategies: Option<Vec<String>>,
    pub scheme: String,
    pub resolution: usize,
}

pub fn cmd_prefmap(args: PrefmapArgs) -> Result<()> {
    if args.resolution < 2 {
        return Err(Error::Config("resolution must be at least 2".into()));
    }
    let schemes: Vec<WeightScheme> = match args.scheme.as_str() {
        "both" => WeightScheme::ALL.to_vec(),
        id => vec![WeightScheme::from_id(id)?],
    };
    let strategy_filter = args
        .strategies
        .as_ref()
        .map(|ids| {
            ids.iter()
                .map(|id| Strategy::from_id(id))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;

    let manifest_path = args.run.join("manifest.json");
    let text =
        std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: FileConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid manifest {}: {e}", manifest_path.display())))?;

    let queries_path = args.run.join("queries.csv");
    let rows = parse_queries(&queries_path)?;

    // (dataset, strategy) -> rep -> queries, in file order.
    let mut grouped: BTreeMap<(String, &'static str), BTreeMap<usize, Vec<QueryRecord>>> =
        BTreeMap::new();
    for (dataset, strategy, rep, record) in rows {
        grouped
            .entry((dataset, strategy.id()))
            .or_default()
            .entry(rep)
            .or_default()
            .push(record);
    }

    let datasets_present: Vec<String> = {
        let mut v: Vec<String> = grouped.keys().map(|(d, _)| d.clone()).collect();
        v.dedup();
        v
    };
    let targets: Vec<String> = match &args.dataset {
        Some(name) => {
            if !datasets_present.contains(name) {
                return Err(Error::Config(format!("run has no dataset named '{name}'")));
            }
            vec![name.clone()]
        }
        None => {
            // Keep datasets with recorded coordinates; a run without any
            // two-dimensional data cannot be mapped.
            let with_coords: Vec<String> = datasets_present
                .iter()
                .filter(|d| {
                    grouped.iter().any(|((gd, _), reps)| {
                        gd == *d && reps.values().flatten().any(|q| q.location.is_some())
                    })
                })
                .cloned()
                .collect();
            if with_coords.is_empty() {
                return Err(Error::NotTwoDimensional(
                    datasets_present.join(", ").to_string(),
                ));
            }
            with_coords
        }
    };

    let out_dir = args.run.join("prefmap");
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let mut written = 0usize;
    for ((dataset, strategy_id), reps) in &grouped {
        if !targets.contains(dataset) {
            continue;
        }
        let strategy = Strategy::from_id(strategy_id).expect("grouped ids are valid");
        if let Some(filter) = &strategy_filter {
            if !filter.contains(&strategy) {
                continue;
            }
        }
        let trials: Vec<&[QueryRecord]> = reps.values().map(Vec::as_slice).collect();
        for &scheme in &schemes {
            let points = collect_locations(dataset, &trials, scheme, manifest.budget)?;
            if points.is_empty() {
                continue;
            }
            let spec = GridSpec::covering(&points, args.resolution, args.resolution, 0.05);
            let grid = kde_grid(&points, spec);
            let base = format!("{dataset}_{strategy_id}_{}", scheme.id());
            write_prefmap_csv(&grid, &out_dir.join(format!("{base}.csv")))?;
            write_prefmap_pgm(&grid, &out_dir.join(format!("{base}.pgm")))?;
            written += 2;
        }
    }
    if written == 0 {
        return Err(Error::Config(
            "no (dataset, strategy) pair matched the filters".into(),
        ));
    }
    println!("wrote {written} preference-map files to {}", out_dir.display());
    Ok(())
}

pub struct CurvesArgs {
    pub run: PathBuf,
}

pub fn cmd_curves(args: CurvesArgs) -> Result<()> {
    let path = args.run.join("accuracies.csv");
    let results = parse_accuracies(&path)?;
    write_curves(&results, &args.run)?;
    let n = results
        .trials
        .iter()
        .map(|t| t.dataset.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    println!("wrote {n} curve files to {}", args.run.join("curves").display());
    Ok(())
}

/// Reads queries.csv back into typed rows.
fn parse_queries(path: &Path) -> Result<Vec<(String, Strategy, usize, QueryRecord)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "dataset,strategy,rep,round,pool_index,x0,x1" {
                return Err(Error::parse(path, 1, "unexpected queries.csv header"));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::parse(path, lineno + 1, "expected 7 fields"));
        }
        let strategy = Strategy::from_id(fields[1])
            .map_err(|_| Error::parse(path, lineno + 1, format!("unknown strategy '{}'", fields[1])))?;
        let rep: usize = fields[2]
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad rep"))?;
        let round: usize = fields[3]
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad round"))?;
        let pool_index: usize = fields[4]
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad pool index"))?;
        let location = match (fields[5], fields[6]) {
            ("", "") => None,
            (x0, x1) => {
                let x0: f64 = x0
                    .parse()
                    .map_err(|_| Error::parse(path, lineno + 1, "bad x0"))?;
                let x1: f64 = x1
                    .parse()
                    .map_err(|_| Error::parse(path, lineno + 1, "bad x1"))?;
                Some([x0, x1])
            }
        };
        rows.push((
            fields[0].to_string(),
            strategy,
            rep,
            QueryRecord {
                round,
                pool_index,
                location,
            },
        ));
    }
    Ok(rows)
}

/// Rebuilds just enough of the run's results from accuracies.csv to drive
/// the curve writer.
fn parse_accuracies(path: &Path) -> Result<BenchResults> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    // (dataset, strategy, rep) -> (round0, rounds as (round, acc))
    let mut cells: BTreeMap<(String, &'static str, usize), (Option<f64>, Vec<(usize, f64)>)> =
        BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "dataset,strategy,rep,round,accuracy" {
                return Err(Error::parse(path, 1, "unexpected accuracies.csv header"));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(path, lineno + 1, "expected 5 fields"));
        }
        let strategy = Strategy::from_id(fields[1])
            .map_err(|_| Error::parse(path, lineno + 1, format!("unknown strategy '{}'", fields[1])))?;
        let rep: usize = fields[2]
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad rep"))?;
        let round: usize = fields[3]
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad round"))?;
        let acc: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad accuracy"))?;
        let cell = cells
            .entry((fields[0].to_string(), strategy.id(), rep))
            .or_default();
        if round == 0 {
            cell.0 = Some(acc);
        } else {
            cell.1.push((round, acc));
        }
    }
    if cells.is_empty() {
        return Err(Error::parse(path, 1, "no trial rows"));
    }
    let mut trials = Vec::with_capacity(cells.len());
    for ((dataset, strategy_id, rep), (round0, mut rounds)) in cells {
        rounds.sort_by_key(|(r, _)| *r);
        trials.push(TrialRecord {
            dataset,
            strategy: Strategy::from_id(strategy_id).expect("ids are valid"),
            rep,
            result: TrialResult {
                round0_accuracy: round0,
                accuracies: rounds.into_iter().map(|(_, a)| a).collect(),
                queries: vec![],
                select_seconds: vec![],
                initial_labeled: vec![],
            },
        });
    }
    Ok(BenchResults { trials })
}
