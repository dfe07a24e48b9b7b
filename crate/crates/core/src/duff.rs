//! Statistics and their dataset-distance utilities.
//!
//! For a statistic `T`, the utility of an output `x` is minus the number of
//! add/remove edits needed to turn the dataset into one whose statistic is
//! `x`. For the median, mode and mean this reduces to a step function which
//! is built here in closed form.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, OutputRange};
use crate::utility::{StepUtility, Support};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticKind {
    Median,
    Mode,
    Mean,
}

impl StatisticKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticKind::Median => "median",
            StatisticKind::Mode => "mode",
            StatisticKind::Mean => "mean",
        }
    }
}

impl std::fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "median" => Ok(StatisticKind::Median),
            "mode" => Ok(StatisticKind::Mode),
            "mean" => Ok(StatisticKind::Mean),
            other => Err(format!("unknown statistic `{other}`")),
        }
    }
}

/// 1-indexed median position: `(n+1)/2` for odd `n`, `n/2` for even `n`.
pub fn median_index(n: usize) -> usize {
    n.div_ceil(2)
}

/// Lower median of sorted values.
pub(crate) fn median_of_sorted(values: &[f64]) -> f64 {
    values[median_index(values.len()) - 1]
}

/// Most frequent value in sorted `values`; ties go to the smallest.
pub(crate) fn mode_of_sorted(values: &[f64]) -> f64 {
    let mut best = (values[0], 0usize);
    let mut i = 0;
    while i < values.len() {
        let j = i + values[i..].iter().take_while(|v| **v == values[i]).count();
        if j - i > best.1 {
            best = (values[i], j - i);
        }
        i = j;
    }
    best.0
}

pub fn eval_statistic(s: &Dataset, kind: StatisticKind) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let values = s.values();
    match (kind, s.range()) {
        (StatisticKind::Median, _) => Ok(median_of_sorted(values)),
        (StatisticKind::Mode, OutputRange::Finite(_)) => Ok(mode_of_sorted(values)),
        (StatisticKind::Mean, OutputRange::Continuous { .. }) => {
            Ok(values.iter().sum::<f64>() / values.len() as f64)
        }
        (kind, range) => Err(Error::IncompatibleRange {
            stat: kind.name(),
            range: range.kind_name(),
        }),
    }
}

/// Utility for `kind` on `s`. Mode uses the labels of `s`'s finite range.
pub fn duff_utility(s: &Dataset, kind: StatisticKind) -> Result<StepUtility> {
    match kind {
        StatisticKind::Median => duff_median(s),
        StatisticKind::Mean => duff_mean(s),
        StatisticKind::Mode => match s.range() {
            OutputRange::Finite(labels) => duff_mode(s, labels),
            r => Err(Error::IncompatibleRange {
                stat: "mode",
                range: r.kind_name(),
            }),
        },
    }
}

fn require_continuous(s: &Dataset, stat: &'static str) -> Result<(f64, f64)> {
    s.range().bounds().ok_or(Error::IncompatibleRange {
        stat,
        range: "finite",
    })
}

/// Median utility.
///
/// With `m` the median index and virtual endpoints `y_0 = a`, `y_{n+1} = b`:
/// the atom `{y_m}` sits at level 0, `[y_{m-k}, y_{m-k+1}]` at level
/// `2k - [n odd]` for `k = 1..=m`, and `[y_{m+k-1}, y_{m+k}]` at level
/// `2k - [n even]` for `k = 1..=n+1-m`.
pub fn duff_median(s: &Dataset) -> Result<StepUtility> {
    require_continuous(s, "median")?;
    if s.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = s.len();
    let m = median_index(n);
    let odd = n % 2 == 1;
    let mut pieces = Vec::with_capacity(n + 2);
    pieces.push((Support::Atom(s.padded(m)), 0));
    for k in 1..=m {
        let level = 2 * k - usize::from(odd);
        pieces.push((
            Support::Interval {
                lo: s.padded(m - k),
                hi: s.padded(m - k + 1),
            },
            level as u32,
        ));
    }
    for k in 1..=(n + 1 - m) {
        let level = 2 * k - usize::from(!odd);
        pieces.push((
            Support::Interval {
                lo: s.padded(m + k - 1),
                hi: s.padded(m + k),
            },
            level as u32,
        ));
    }
    StepUtility::new(pieces, s.range().clone())
}

/// Mode utility over `labels`: each label `x` is an atom at level `n_max - n_x`.
pub fn duff_mode(s: &Dataset, labels: &[f64]) -> Result<StepUtility> {
    let range = OutputRange::finite(labels.iter().copied())?;
    if s.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(v) = s.values().iter().find(|v| !range.contains(**v)) {
        return Err(Error::UnknownLabel(*v));
    }
    let count = |x: f64| s.values().iter().filter(|v| **v == x).count();
    let OutputRange::Finite(sorted) = &range else {
        unreachable!()
    };
    let counts: Vec<usize> = sorted.iter().map(|x| count(*x)).collect();
    let n_max = counts.iter().copied().max().unwrap_or(0);
    let pieces = sorted
        .iter()
        .zip(&counts)
        .map(|(x, c)| (Support::Atom(*x), (n_max - c) as u32))
        .collect();
    StepUtility::new(pieces, range)
}

/// Upper bound on the number of removal subsets enumerated when locating
/// removal-only means.
const REMOVAL_ENUMERATION_BUDGET: u64 = 1 << 16;

/// Mean utility.
///
/// `I_c` is the set of means reachable with at most `c` edits of which at
/// least one is an addition; its ends come from removing the `j` largest
/// (smallest) values and adding `i` copies of `a` (`b`). Each growth of `I_c`
/// is emitted as a level-`c` interval. Means reachable by removals alone form
/// a null set; they are added as atoms where they beat the interval level and
/// the number of removal subsets stays within a fixed budget.
pub fn duff_mean(s: &Dataset) -> Result<StepUtility> {
    let (a, b) = require_continuous(s, "mean")?;
    if s.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let y = s.values();
    let n = y.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in y {
        prefix.push(prefix.last().unwrap() + v);
    }
    let total = prefix[n];
    let mu = total / n as f64;

    // lo_c / hi_c for c = 0..=n+1
    let mut lo = vec![mu];
    let mut hi = vec![mu];
    for c in 1..=n + 1 {
        let (mut l, mut h) = (lo[c - 1], hi[c - 1]);
        for j in 0..=n.min(c - 1) {
            let i = c - j;
            let size = (n - j + i) as f64;
            l = l.min((prefix[n - j] + i as f64 * a) / size);
            h = h.max((total - prefix[j] + i as f64 * b) / size);
        }
        lo.push(l.max(a));
        hi.push(h.min(b));
    }
    lo[n + 1] = a;
    hi[n + 1] = b;

    let mut pieces = vec![(Support::Atom(mu), 0)];
    for c in 1..=n + 1 {
        pieces.push((
            Support::Interval {
                lo: lo[c],
                hi: lo[c - 1],
            },
            c as u32,
        ));
        pieces.push((
            Support::Interval {
                lo: hi[c - 1],
                hi: hi[c],
            },
            c as u32,
        ));
    }

    let interval_level = |x: f64| {
        (1..=n + 1)
            .find(|&c| lo[c] <= x && x <= hi[c])
            .unwrap_or(n + 1)
    };
    let mut spent: u64 = 0;
    for j in 1..n {
        let subsets = binomial(n as u64, j as u64);
        spent = spent.saturating_add(subsets);
        if spent > REMOVAL_ENUMERATION_BUDGET {
            break;
        }
        let mut atoms: Vec<f64> = removal_sums(y, j)
            .into_iter()
            .map(|removed| (total - removed) / (n - j) as f64)
            .filter(|x| interval_level(*x) > j)
            .collect();
        atoms.sort_by(f64::total_cmp);
        atoms.dedup();
        pieces.extend(atoms.into_iter().map(|x| (Support::Atom(x), j as u32)));
    }
    StepUtility::new(pieces, s.range().clone())
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Sums of every size-`j` sub-multiset of sorted `y`, without repeats from equal values.
fn removal_sums(y: &[f64], j: usize) -> Vec<f64> {
    fn go(y: &[f64], start: usize, left: usize, acc: f64, out: &mut Vec<f64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        let mut i = start;
        while i + left <= y.len() {
            go(y, i + 1, left - 1, acc + y[i], out);
            let v = y[i];
            while i < y.len() && y[i] == v {
                i += 1;
            }
        }
    }
    let mut out = Vec::new();
    go(y, 0, j, 0.0, &mut out);
    out
}
