//! Run configuration: JSON file schema, flag overrides, and the manifest.
//!
//! Precedence is flag > config file > built-in default. The manifest
//! written into each run directory is itself a valid config file (unknown
//! informational keys are ignored on parse), so `albench bench --config
//! manifest.json` reproduces a run.

use albench_core::data::{
    load_csv, load_libsvm, scale_range, standardize, LabelColumn, SYNTH2_COMPONENTS,
    SYNTH3_COMPONENTS, SYNTH3_TILT_RADIANS,
};
use albench_core::engine::{DataSource, DatasetJob, ExperimentConfig};
use albench_core::strategies::{Strategy, StrategyParams};
use albench_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable overriding the directory dataset paths resolve
/// against (default: the config file's directory, else the working dir).
pub const DATA_ROOT_ENV: &str = "ALBENCH_DATA_ROOT";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct FileConfig {
    pub master_seed: u64,
    pub budget: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub strategies: Vec<String>,
    pub eval_initial_round: bool,
    /// Worker threads; 0 means all available cores.
    pub workers: usize,
    /// Default per-class sample count for synthetic datasets.
    pub synth_n_per_class: usize,
    pub beta_grid: Vec<f64>,
    pub aal_noise: f64,
    pub aal_pool_cap: usize,
    pub datasets: Vec<DatasetConfig>,
}

impl Default for FileConfig {
    fn default() -> Self {
        let params = StrategyParams::default();
        FileConfig {
            master_seed: 42,
            budget: 40,
            lambda: params.lambda,
            alpha: params.alpha,
            strategies: Strategy::ALL.iter().map(|s| s.id().to_string()).collect(),
            eval_initial_round: false,
            workers: 0,
            synth_n_per_class: 200,
            beta_grid: params.beta_grid,
            aal_noise: params.aal_noise,
            aal_pool_cap: params.aal_pool_cap,
            datasets: vec![
                DatasetConfig::synth("synth1"),
                DatasetConfig::synth("synth2"),
                DatasetConfig::synth("synth3"),
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum LabelColumnConfig {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DatasetConfig {
    pub name: String,
    /// One of synth1, synth2, synth3, csv, libsvm.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Repetitions; defaults to 1000 for synthetic kinds and 20 for files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_per_class: Option<usize>,
    /// Label column for CSV data; last column when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<LabelColumnConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_header: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_label: Option<String>,
    /// One of none, standardize, scale_range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocessing: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_hi: Option<f64>,
}

impl DatasetConfig {
    fn synth(kind: &str) -> Self {
        DatasetConfig {
            name: kind.to_string(),
            kind: kind.to_string(),
            path: None,
            reps: None,
            n_per_class: None,
            label_column: None,
            has_header: None,
            positive_label: None,
            preprocessing: None,
            scale_lo: None,
            scale_hi: None,
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self.kind.as_str(), "synth1" | "synth2" | "synth3")
    }
}

/// Flag-level overrides collected by the argument parser.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub master_seed: Option<u64>,
    pub budget: Option<usize>,
    pub workers: Option<usize>,
    pub strategies: Option<Vec<String>>,
    pub reps: Option<usize>,
}

/// Reads the config file (when given), applies flag overrides, and fills
/// per-dataset defaults. The result is the exact configuration the run
/// uses and what the manifest records.
pub fn resolve_config(config_path: Option<&Path>, overrides: &Overrides) -> Result<FileConfig> {
    let mut cfg = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    if let Some(seed) = overrides.master_seed {
        cfg.master_seed = seed;
    }
    if let Some(budget) = overrides.budget {
        cfg.budget = budget;
    }
    if let Some(workers) = overrides.workers {
        cfg.workers = workers;
    }
    if let Some(strategies) = &overrides.strategies {
        cfg.strategies = strategies.clone();
    }
    for ds in &mut cfg.datasets {
        if let Some(reps) = overrides.reps {
            ds.reps = Some(reps);
        }
        let synthetic = ds.is_synthetic();
        ds.reps.get_or_insert(if synthetic { 1000 } else { 20 });
        if synthetic {
            ds.n_per_class.get_or_insert(cfg.synth_n_per_class);
        }
    }
    Ok(cfg)
}

/// Translates the resolved config into engine inputs, loading file-backed
/// datasets relative to `data_root`.
pub fn build_jobs(cfg: &FileConfig, data_root: &Path) -> Result<Vec<DatasetJob>> {
    let mut jobs = Vec::with_capacity(cfg.datasets.len());
    for ds in &cfg.datasets {
        let n_per_class = ds.n_per_class.unwrap_or(cfg.synth_n_per_class);
        let source = match ds.kind.as_str() {
            "synth1" => DataSource::Synth1 { n_per_class },
            "synth2" => DataSource::Synth2 { n_per_class },
            "synth3" => DataSource::Synth3 { n_per_class },
            "csv" | "libsvm" => {
                let rel = ds.path.as_deref().ok_or_else(|| {
                    Error::Config(format!("dataset '{}' needs a path", ds.name))
                })?;
                let path = resolve_path(data_root, rel);
                let mut data = if ds.kind == "csv" {
                    let label = match &ds.label_column {
                        Some(LabelColumnConfig::Index(i)) => LabelColumn::Index(*i),
                        Some(LabelColumnConfig::Name(n)) => LabelColumn::Name(n.clone()),
                        None => last_column_label(&path)?,
                    };
                    load_csv(
                        &path,
                        &label,
                        ds.has_header.unwrap_or(true),
                        ds.positive_label.as_deref(),
                    )?
                } else {
                    load_libsvm(&path)?
                };
                data.name = ds.name.clone();
                match ds.preprocessing.as_deref().unwrap_or("none") {
                    "none" => {}
                    "standardize" => data = standardize(&data),
                    "scale_range" => {
                        data = scale_range(
                            &data,
                            ds.scale_lo.unwrap_or(-1.0),
                            ds.scale_hi.unwrap_or(1.0),
                        )
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "dataset '{}': unknown preprocessing '{other}'",
                            ds.name
                        )))
                    }
                }
                DataSource::Fixed(data)
            }
            other => {
                return Err(Error::Config(format!(
                    "dataset '{}': unknown kind '{other}'",
                    ds.name
                )))
            }
        };
        jobs.push(DatasetJob {
            name: ds.name.clone(),
            source,
            reps: ds.reps.unwrap_or(1),
        });
    }
    Ok(jobs)
}

fn resolve_path(data_root: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        data_root.join(p)
    }
}

/// Peeks at a CSV file's first line to address the last column by position.
fn last_column_label(path: &Path) -> Result<LabelColumn> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let first = text
        .lines()
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    Ok(LabelColumn::Index(first.split(',').count() - 1))
}

pub fn experiment_config(cfg: &FileConfig) -> Result<ExperimentConfig> {
    let strategies = cfg
        .strategies
        .iter()
        .map(|id| Strategy::from_id(id))
        .collect::<Result<Vec<_>>>()?;
    let params = StrategyParams {
        lambda: cfg.lambda,
        alpha: cfg.alpha,
        beta_grid: cfg.beta_grid.clone(),
        aal_noise: cfg.aal_noise,
        aal_pool_cap: cfg.aal_pool_cap,
        ..StrategyParams::default()
    };
    params.validate()?;
    Ok(ExperimentConfig {
        budget: cfg.budget,
        params,
        strategies,
        master_seed: cfg.master_seed,
        eval_initial_round: cfg.eval_initial_round,
    })
}

/// The manifest is the resolved config plus informational fields; the
/// extra keys are ignored when a manifest is used as a config file.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool_version: &'static str,
    pub synth2_components: &'static [albench_core::data::GaussComponent],
    pub synth3_components: &'static [albench_core::data::GaussComponent],
    pub synth3_tilt_radians: f64,
    #[serde(flatten)]
    pub config: &'a FileConfig,
}

pub fn write_manifest(cfg: &FileConfig, out_dir: &Path) -> Result<()> {
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        synth2_components: &SYNTH2_COMPONENTS,
        synth3_components: &SYNTH3_COMPONENTS,
        synth3_tilt_radians: SYNTH3_TILT_RADIANS,
        config: cfg,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Directory dataset paths resolve against.
pub fn data_root(config_path: Option<&Path>) -> PathBuf {
    if let Ok(root) = std::env::var(DATA_ROOT_ENV) {
        return PathBuf::from(root);
    }
    config_path
        .and_then(|p| p.parent())
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}
