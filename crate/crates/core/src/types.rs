//! Datasets, output ranges and privacy parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The space a released statistic lives in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OutputRange {
    /// Closed interval `[lo, hi]` with Lebesgue measure.
    Continuous { lo: f64, hi: f64 },
    /// Finite label set with counting measure. Labels are kept sorted and distinct.
    Finite(Vec<f64>),
}

impl OutputRange {
    pub fn continuous(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidRange(format!("[{lo}, {hi}]")));
        }
        Ok(OutputRange::Continuous { lo, hi })
    }

    pub fn finite(labels: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut labels: Vec<f64> = labels.into_iter().collect();
        if labels.is_empty() {
            return Err(Error::InvalidRange("empty label set".into()));
        }
        if labels.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidRange("non-finite label".into()));
        }
        labels.sort_by(f64::total_cmp);
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRange("duplicate labels".into()));
        }
        Ok(OutputRange::Finite(labels))
    }

    /// `(lo, hi)` for a continuous range.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            OutputRange::Continuous { lo, hi } => Some((lo, hi)),
            OutputRange::Finite(_) => None,
        }
    }

    /// `hi - lo` for continuous ranges, the number of labels otherwise.
    pub fn total_measure(&self) -> f64 {
        match self {
            OutputRange::Continuous { lo, hi } => hi - lo,
            OutputRange::Finite(labels) => labels.len() as f64,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, OutputRange::Continuous { .. })
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            OutputRange::Continuous { lo, hi } => *lo <= x && x <= *hi,
            OutputRange::Finite(labels) => labels.binary_search_by(|l| l.total_cmp(&x)).is_ok(),
        }
    }

    pub(crate) fn kind_name(&self) -> &'static str {
        match self {
            OutputRange::Continuous { .. } => "continuous",
            OutputRange::Finite(_) => "finite",
        }
    }
}

/// `min(hi, max(lo, x))`. Finite ranges are returned unchanged.
pub fn clamp_to_range(x: f64, range: &OutputRange) -> f64 {
    match *range {
        OutputRange::Continuous { lo, hi } => x.max(lo).min(hi),
        OutputRange::Finite(_) => x,
    }
}

/// A bounded multiset of reals, stored sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
    range: OutputRange,
}

impl Dataset {
    /// Clamps `raw` into a continuous range and sorts it.
    pub fn new(raw: &[f64], range: OutputRange) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (lo, hi) = range
            .bounds()
            .ok_or_else(|| Error::InvalidRange("clamping requires a continuous range".into()))?;
        if raw.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidRange("NaN in raw data".into()));
        }
        let mut values: Vec<f64> = raw.iter().map(|v| v.max(lo).min(hi)).collect();
        values.sort_by(f64::total_cmp);
        Ok(Dataset { values, range })
    }

    /// A dataset over a finite label set. Every value must be a label.
    pub fn with_labels(raw: &[f64], range: OutputRange) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if range.is_continuous() {
            return Dataset::new(raw, range);
        }
        if let Some(v) = raw.iter().find(|v| !range.contains(**v)) {
            return Err(Error::UnknownLabel(*v));
        }
        let mut values = raw.to_vec();
        values.sort_by(f64::total_cmp);
        Ok(Dataset { values, range })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> &OutputRange {
        &self.range
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `y_i` with the virtual endpoints `y_0 = lo` and `y_{n+1} = hi` (1-indexed).
    pub(crate) fn padded(&self, i: usize) -> f64 {
        let (lo, hi) = self.range.bounds().expect("continuous range");
        if i == 0 {
            lo
        } else if i > self.values.len() {
            hi
        } else {
            self.values[i - 1]
        }
    }

    /// The dataset with one more copy of `value` (clamped into the range).
    pub fn with_added(&self, value: f64) -> Self {
        let v = clamp_to_range(value, &self.range);
        let pos = self.values.partition_point(|y| *y <= v);
        let mut values = self.values.clone();
        values.insert(pos, v);
        Dataset {
            values,
            range: self.range.clone(),
        }
    }

    /// The dataset without its `index`-th sorted element. `None` if that would empty it.
    pub fn with_removed(&self, index: usize) -> Option<Self> {
        if self.values.len() <= 1 || index >= self.values.len() {
            return None;
        }
        let mut values = self.values.clone();
        values.remove(index);
        Some(Dataset {
            values,
            range: self.range.clone(),
        })
    }
}

/// `(epsilon, delta)` with `epsilon > 0` and `0 <= delta < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidPrivacy(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidPrivacy(format!(
                "delta must be in [0, 1), got {delta}"
            )));
        }
        Ok(PrivacyParams { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        PrivacyParams::new(epsilon, 0.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}
