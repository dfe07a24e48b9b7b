//! Synthetic datasets and delimited-text ingestion.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use duff_core::{Dataset, OutputRange, RngStream};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// N(0, 1).
    Normal,
    /// U(0, 1).
    Uniform,
    /// Beta(0.5, 0.5), the bimodal arcsine law.
    Beta,
}

impl Distribution {
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Normal => "normal",
            Distribution::Uniform => "uniform",
            Distribution::Beta => "beta",
        }
    }

    /// `[-10, 10]` for the normal, `[0, 1]` otherwise.
    pub fn default_range(&self) -> OutputRange {
        let (lo, hi) = match self {
            Distribution::Normal => (-10.0, 10.0),
            Distribution::Uniform | Distribution::Beta => (0.0, 1.0),
        };
        OutputRange::continuous(lo, hi).expect("valid default range")
    }

    fn draw(&self, rng: &mut RngStream) -> f64 {
        match self {
            // Box-Muller, cosine branch only.
            Distribution::Normal => {
                let r = (-2.0 * rng.uniform_open().ln()).sqrt();
                r * (std::f64::consts::TAU * rng.uniform_open()).cos()
            }
            Distribution::Uniform => rng.uniform_open(),
            Distribution::Beta => (std::f64::consts::FRAC_PI_2 * rng.uniform_open())
                .sin()
                .powi(2),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Distribution::Normal),
            "uniform" => Ok(Distribution::Uniform),
            "beta" => Ok(Distribution::Beta),
            _ => bail!("unknown distribution `{s}` (expected normal, uniform or beta)"),
        }
    }
}

/// `n` i.i.d. draws clamped into `range`.
pub fn gen_synthetic(
    dist: Distribution,
    n: usize,
    range: OutputRange,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        bail!("n must be at least 1");
    }
    let mut rng = RngStream::new(seed);
    let raw: Vec<f64> = (0..n).map(|_| dist.draw(&mut rng)).collect();
    Ok(Dataset::new(&raw, range)?)
}

/// A column picked by 0-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "{i}"),
            ColumnRef::Name(n) => f.write_str(n),
        }
    }
}

/// Rows of a delimited text file, with the header split off if there is one.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Option<Vec<String>>,
    /// `(line number, cells)`, 1-based line numbers.
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    /// Reads comma-separated text if the first non-blank line has a comma,
    /// whitespace-separated text otherwise. The first row is a header when
    /// none of its cells parse as numbers.
    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Table::parse(&text))
    }

    pub fn parse(text: &str) -> Self {
        let comma = text
            .lines()
            .find(|l| !l.trim().is_empty())
            .is_some_and(|l| l.contains(','));
        let mut rows: Vec<(usize, Vec<String>)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let cells = if comma {
                    l.split(',').map(|c| c.trim().to_string()).collect()
                } else {
                    l.split_whitespace().map(str::to_string).collect()
                };
                (i + 1, cells)
            })
            .collect();
        let header = match rows.first() {
            Some((_, cells)) if cells.iter().all(|c| c.parse::<f64>().is_err()) => {
                Some(rows.remove(0).1)
            }
            _ => None,
        };
        Table { header, rows }
    }

    pub fn resolve(&self, column: &ColumnRef) -> Result<usize> {
        let width = self.rows.iter().map(|(_, r)| r.len()).max().unwrap_or(0);
        match column {
            ColumnRef::Index(i) if *i < width => Ok(*i),
            ColumnRef::Index(i) => bail!("column {i} does not exist (rows have {width} columns)"),
            ColumnRef::Name(name) => self
                .header
                .as_ref()
                .ok_or_else(|| {
                    anyhow!("column `{name}` requested by name but the file has no header")
                })?
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| anyhow!("no column named `{name}`")),
        }
    }

    /// Numeric values of `column`, keeping rows whose `class_column` cell equals `class_value`.
    pub fn select(
        &self,
        column: &ColumnRef,
        class: Option<(&ColumnRef, &str)>,
    ) -> Result<Vec<f64>> {
        let col = self.resolve(column)?;
        let class = class
            .map(|(c, v)| self.resolve(c).map(|i| (i, v)))
            .transpose()?;
        let mut out = Vec::new();
        for (line, cells) in &self.rows {
            if let Some((ci, value)) = class {
                match cells.get(ci) {
                    Some(c) if c == value => {}
                    Some(_) => continue,
                    None => bail!("row {line}: missing class column {ci}"),
                }
            }
            let cell = cells
                .get(col)
                .ok_or_else(|| anyhow!("row {line}: missing column {col}"))?;
            let v: f64 = cell
                .parse()
                .map_err(|_| anyhow!("row {line}: non-numeric value `{cell}` in column {col}"))?;
            out.push(v);
        }
        Ok(out)
    }

    /// Distinct values of a class column in first-seen order.
    pub fn classes(&self, class_column: &ColumnRef) -> Result<Vec<String>> {
        let ci = self.resolve(class_column)?;
        let mut seen: Vec<String> = Vec::new();
        for (line, cells) in &self.rows {
            let c = cells
                .get(ci)
                .ok_or_else(|| anyhow!("row {line}: missing class column {ci}"))?;
            if !seen.contains(c) {
                seen.push(c.clone());
            }
        }
        Ok(seen)
    }
}

/// Builds a dataset from the values, clamping for continuous ranges.
pub fn dataset_from_values(values: &[f64], range: OutputRange) -> Result<Dataset> {
    if values.is_empty() {
        bail!("no rows left after filtering");
    }
    Ok(Dataset::with_labels(values, range)?)
}

/// Reads one numeric column of a delimited file, optionally filtered by class.
pub fn ingest_csv(
    path: &Path,
    column: &ColumnRef,
    class_column: Option<&ColumnRef>,
    class_value: Option<&str>,
    range: OutputRange,
) -> Result<Dataset> {
    let table = Table::read(path)?;
    let class = match (class_column, class_value) {
        (Some(c), Some(v)) => Some((c, v)),
        (None, None) => None,
        _ => bail!("class column and class value must be given together"),
    };
    let values = table.select(column, class)?;
    dataset_from_values(&values, range).with_context(|| format!("ingesting {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_data() {
        for d in [
            Distribution::Normal,
            Distribution::Uniform,
            Distribution::Beta,
        ] {
            let a = gen_synthetic(d, 50, d.default_range(), 9).unwrap();
            let b = gen_synthetic(d, 50, d.default_range(), 9).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn uniform_mean() {
        let s = gen_synthetic(
            Distribution::Uniform,
            100_000,
            Distribution::Uniform.default_range(),
            1,
        )
        .unwrap();
        let mean = s.values().iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 0.5).abs() < 0.005, "{mean}");
    }

    #[test]
    fn beta_cdf_at_half() {
        let s = gen_synthetic(
            Distribution::Beta,
            100_000,
            Distribution::Beta.default_range(),
            2,
        )
        .unwrap();
        let frac = s.values().iter().filter(|v| **v <= 0.5).count() as f64 / s.len() as f64;
        let exact = 2.0 / std::f64::consts::PI * 0.5f64.sqrt().asin();
        assert!((frac - exact).abs() < 0.005, "{frac} vs {exact}");
    }

    #[test]
    fn normal_moments() {
        let s = gen_synthetic(
            Distribution::Normal,
            100_000,
            Distribution::Normal.default_range(),
            3,
        )
        .unwrap();
        let n = s.len() as f64;
        let mean = s.values().iter().sum::<f64>() / n;
        let var = s.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn zero_n_is_an_error() {
        assert!(gen_synthetic(
            Distribution::Uniform,
            0,
            Distribution::Uniform.default_range(),
            0
        )
        .is_err());
    }

    #[test]
    fn parses_header_and_commas() {
        let t = Table::parse("a,b,class\n1,2,x\n3,4,y\n5,6,x\n");
        assert_eq!(
            t.header.as_deref(),
            Some(&["a".to_string(), "b".into(), "class".into()][..])
        );
        let name = ColumnRef::Name("b".into());
        let class = ColumnRef::Name("class".into());
        assert_eq!(t.select(&name, None).unwrap(), vec![2.0, 4.0, 6.0]);
        assert_eq!(
            t.select(&ColumnRef::Index(0), Some((&class, "x"))).unwrap(),
            vec![1.0, 5.0]
        );
        assert_eq!(t.classes(&class).unwrap(), vec!["x", "y"]);
    }

    #[test]
    fn whitespace_without_header() {
        let t = Table::parse("1.5  2 AB\n\n3\t4 NO\n");
        assert!(t.header.is_none());
        assert_eq!(
            t.select(&ColumnRef::Index(1), None).unwrap(),
            vec![2.0, 4.0]
        );
    }

    #[test]
    fn reports_bad_cells_and_columns() {
        let t = Table::parse("1 2\n3 oops\n");
        let err = t
            .select(&ColumnRef::Index(1), None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("row 2"), "{err}");
        assert!(t.select(&ColumnRef::Index(5), None).is_err());
        assert!(t.select(&ColumnRef::Name("a".into()), None).is_err());
    }

    #[test]
    fn empty_filter_is_an_error() {
        let t = Table::parse("1 A\n2 A\n");
        let v = t
            .select(&ColumnRef::Index(0), Some((&ColumnRef::Index(1), "B")))
            .unwrap();
        assert!(dataset_from_values(&v, OutputRange::continuous(0.0, 1.0).unwrap()).is_err());
    }
}
