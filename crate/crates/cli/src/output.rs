//! CSV files consumed by the plotting scripts.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use crate::experiment::{Estimate, ExperimentRecord};

pub const RESULTS_HEADER: [&str; 12] = [
    "mechanism",
    "statistic",
    "source",
    "epsilon",
    "delta",
    "dataset_id",
    "n",
    "true_value",
    "mean_abs_err",
    "std_abs_err",
    "trials",
    "seed",
];

pub const ESTIMATES_HEADER: [&str; 4] = ["mechanism", "class", "trial", "estimate"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_records<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        w.write_record([
            r.mechanism.id().to_string(),
            r.statistic.name().to_string(),
            r.source.clone(),
            fmt_float(r.epsilon),
            fmt_float(r.delta),
            r.dataset_id.to_string(),
            r.n.to_string(),
            fmt_float(r.true_value),
            fmt_float(r.mean_abs_err),
            fmt_float(r.std_abs_err),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_records(records, file).with_context(|| format!("writing {}", path.display()))
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(RESULTS_HEADER) {
        bail!("unexpected header {:?}", r.headers()?);
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let get = |j: usize| {
            row.get(j)
                .ok_or_else(|| anyhow!("row {}: missing field {}", i + 2, RESULTS_HEADER[j]))
        };
        let float = |j: usize| -> Result<f64> { Ok(get(j)?.parse()?) };
        out.push(ExperimentRecord {
            mechanism: get(0)?.parse().map_err(|e: String| anyhow!(e))?,
            statistic: get(1)?.parse().map_err(|e| anyhow!("{e}"))?,
            source: get(2)?.to_string(),
            epsilon: float(3)?,
            delta: float(4)?,
            dataset_id: get(5)?.parse()?,
            n: get(6)?.parse()?,
            true_value: float(7)?,
            mean_abs_err: float(8)?,
            std_abs_err: float(9)?,
            trials: get(10)?.parse()?,
            seed: get(11)?.parse()?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_records(file)
}

pub fn write_estimates(estimates: &[Estimate], path: &Path) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(ESTIMATES_HEADER)?;
    for e in estimates {
        w.write_record([
            e.mechanism.id().to_string(),
            e.class.clone(),
            e.trial.to_string(),
            fmt_float(e.estimate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `results.csv` -> `results.estimates.csv`.
pub fn estimates_path(results: &Path) -> std::path::PathBuf {
    results.with_extension("estimates.csv")
}
