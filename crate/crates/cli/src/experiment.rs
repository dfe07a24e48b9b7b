//! The Monte-Carlo runner: datasets × mechanisms × ε, repeated releases per cell.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use duff_core::{
    derive_seed, eval_statistic, Dataset, Error as CoreError, GridLlnStrategy, MechanismKind,
    OutputRange, Prepared, PrivacyParams, RngStream, StatisticKind,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{dataset_from_values, gen_synthetic, ColumnRef, Distribution, Table};

/// Stream tags keeping data generation and releases on disjoint seed paths.
const DATA_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;

#[derive(Debug, Clone)]
pub enum DataSource {
    Synthetic {
        dist: Distribution,
        n: usize,
        datasets: usize,
    },
    /// One dataset per class when `class_column` is set without `class_value`.
    File {
        path: PathBuf,
        column: ColumnRef,
        class_column: Option<ColumnRef>,
        class_value: Option<String>,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub statistic: StatisticKind,
    pub mechanisms: Vec<MechanismKind>,
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub source: DataSource,
    pub range: OutputRange,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if let DataSource::Synthetic { datasets: 0, .. } = self.source {
            bail!("datasets must be at least 1");
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            bail!("epsilons must be a nonempty list of positive numbers");
        }
        if self.mechanisms.is_empty() {
            bail!("no mechanisms selected");
        }
        if !(0.0..1.0).contains(&self.delta) {
            bail!("delta must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub mechanism: MechanismKind,
    pub statistic: StatisticKind,
    pub source: String,
    pub epsilon: f64,
    pub delta: f64,
    pub dataset_id: usize,
    pub n: usize,
    pub true_value: f64,
    pub mean_abs_err: f64,
    /// Sample standard deviation over trials, 0 for a single trial.
    pub std_abs_err: f64,
    pub trials: usize,
    /// The master seed of the run.
    pub seed: u64,
}

/// One released value, kept for histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mechanism: MechanismKind,
    pub class: String,
    pub trial: usize,
    pub estimate: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub records: Vec<ExperimentRecord>,
    pub estimates: Vec<Estimate>,
}

/// A dataset with its identity in the run.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub id: usize,
    pub source: String,
    pub class: String,
    pub data: Dataset,
}

pub fn load_datasets(config: &ExperimentConfig) -> Result<Vec<LoadedDataset>> {
    match &config.source {
        DataSource::Synthetic { dist, n, datasets } => (0..*datasets)
            .map(|id| {
                let seed = derive_seed(config.seed, &[DATA_STREAM, id as u64]);
                Ok(LoadedDataset {
                    id,
                    source: dist.name().to_string(),
                    class: String::new(),
                    data: gen_synthetic(*dist, *n, config.range.clone(), seed)?,
                })
            })
            .collect(),
        DataSource::File {
            path,
            column,
            class_column,
            class_value,
        } => {
            let table = Table::read(path)?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let classes: Vec<Option<String>> = match (class_column, class_value) {
                (Some(_), Some(v)) => vec![Some(v.clone())],
                (Some(c), None) => table.classes(c)?.into_iter().map(Some).collect(),
                (None, None) => vec![None],
                (None, Some(_)) => bail!("class value given without a class column"),
            };
            classes
                .into_iter()
                .enumerate()
                .map(|(id, class)| {
                    let filter = class_column.as_ref().zip(class.as_deref());
                    let values = table.select(column, filter)?;
                    let label = class.unwrap_or_default();
                    let data = dataset_from_values(&values, config.range.clone())
                        .with_context(|| format!("class `{label}` of {}", path.display()))?;
                    let source = if label.is_empty() {
                        stem.clone()
                    } else {
                        format!("{stem}:{label}")
                    };
                    Ok(LoadedDataset {
                        id,
                        source,
                        class: label,
                        data,
                    })
                })
                .collect()
        }
    }
}

fn mechanism_index(m: MechanismKind) -> u64 {
    MechanismKind::ALL
        .iter()
        .position(|k| *k == m)
        .expect("known mechanism") as u64
}

/// Seed of one release; depends only on the master seed and the cell coordinates.
pub fn trial_seed(
    master: u64,
    dataset_id: usize,
    mechanism: MechanismKind,
    eps_index: usize,
    trial: usize,
) -> u64 {
    derive_seed(
        master,
        &[
            TRIAL_STREAM,
            dataset_id as u64,
            mechanism_index(mechanism),
            eps_index as u64,
            trial as u64,
        ],
    )
}

/// Runs every (dataset, mechanism, ε) cell. Cells run in parallel on the
/// current rayon pool; output order is datasets, then mechanisms, then ε, as
/// listed in the config. Cells whose mechanism cannot be set up for the
/// parameters are skipped with a warning.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    Ok(run_experiment_detailed(config, false)?.records)
}

pub fn run_experiment_detailed(
    config: &ExperimentConfig,
    keep_estimates: bool,
) -> Result<ExperimentOutput> {
    config.validate()?;
    let datasets = load_datasets(config)?;
    let truths: Vec<f64> = datasets
        .iter()
        .map(|d| eval_statistic(&d.data, config.statistic))
        .collect::<std::result::Result<_, _>>()?;

    let mut cells = Vec::new();
    for (di, _) in datasets.iter().enumerate() {
        for &mech in &config.mechanisms {
            for (ei, &eps) in config.epsilons.iter().enumerate() {
                cells.push((di, mech, ei, eps));
            }
        }
    }

    let results: Vec<Option<(ExperimentRecord, Vec<Estimate>)>> = cells
        .par_iter()
        .map(|&(di, mech, ei, eps)| {
            run_cell(
                config,
                &datasets[di],
                truths[di],
                mech,
                ei,
                eps,
                keep_estimates,
            )
        })
        .collect::<Result<_>>()?;

    let mut out = ExperimentOutput::default();
    for (record, estimates) in results.into_iter().flatten() {
        out.records.push(record);
        out.estimates.extend(estimates);
    }
    Ok(out)
}

fn run_cell(
    config: &ExperimentConfig,
    ds: &LoadedDataset,
    truth: f64,
    mech: MechanismKind,
    eps_index: usize,
    epsilon: f64,
    keep_estimates: bool,
) -> Result<Option<(ExperimentRecord, Vec<Estimate>)>> {
    let privacy = PrivacyParams::new(epsilon, config.delta)?;
    let prepared = match Prepared::new(
        &ds.data,
        config.statistic,
        mech,
        privacy,
        &GridLlnStrategy::default(),
    ) {
        Ok(p) => p,
        Err(
            e @ (CoreError::Infeasible(_) | CoreError::Certification(_) | CoreError::Domain(_)),
        ) => {
            log::warn!(
                "skipping {mech} on {} #{} at eps={epsilon}: {e}",
                ds.source,
                ds.id
            );
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };
    let mut errors = Vec::with_capacity(config.trials);
    let mut estimates = Vec::new();
    for trial in 0..config.trials {
        let mut rng = RngStream::new(trial_seed(config.seed, ds.id, mech, eps_index, trial));
        let released = prepared.release(&mut rng)?;
        debug_assert!(config.range.contains(released.value));
        errors.push((truth - released.value).abs());
        if keep_estimates {
            estimates.push(Estimate {
                mechanism: mech,
                class: ds.class.clone(),
                trial,
                estimate: released.value,
            });
        }
    }
    let (mean, std) = mean_std(&errors);
    let record = ExperimentRecord {
        mechanism: mech,
        statistic: config.statistic,
        source: ds.source.clone(),
        epsilon,
        delta: config.delta,
        dataset_id: ds.id,
        n: ds.data.len(),
        true_value: truth,
        mean_abs_err: mean,
        std_abs_err: std,
        trials: config.trials,
        seed: config.seed,
    };
    Ok(Some((record, estimates)))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
