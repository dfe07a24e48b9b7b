//! Piecewise-constant utilities and their exact exponential-mechanism law.
//!
//! A [`StepUtility`] assigns every output an integer level `k >= 0`, meaning
//! utility `-k`. The exponential mechanism with sensitivity 1 then puts mass
//! `measure(piece) * exp(-eps * k / 2)` on each piece. All weights are handled
//! in log space so that levels in the thousands at large `eps` stay finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::OutputRange;

/// Where a piece lives in the output space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Support {
    /// Closed interval `[lo, hi]`, possibly of zero length.
    Interval { lo: f64, hi: f64 },
    /// A single point.
    Atom(f64),
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Interval { lo, hi } => lo <= x && x <= hi,
            Support::Atom(v) => v == x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub support: Support,
    /// Lebesgue length for intervals, 0 for atoms in a continuous range and 1
    /// for atoms in a finite range.
    pub measure: f64,
    pub level: u32,
}

impl Piece {
    pub fn log_measure(&self) -> f64 {
        if self.measure > 0.0 {
            self.measure.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepUtility {
    pieces: Vec<Piece>,
    range: OutputRange,
}

/// Relative slack allowed when checking that interval lengths add up to the range width.
const COVERAGE_TOL: f64 = 1e-9;

impl StepUtility {
    /// Builds a utility from `(support, level)` pairs, deriving each measure
    /// from the range kind.
    pub fn new(supports: Vec<(Support, u32)>, range: OutputRange) -> Result<Self> {
        if supports.is_empty() {
            return Err(Error::InvalidUtility("no pieces".into()));
        }
        let mut pieces = Vec::with_capacity(supports.len());
        for (support, level) in supports {
            let measure = match (support, &range) {
                (Support::Interval { lo, hi }, OutputRange::Continuous { lo: a, hi: b }) => {
                    if lo.is_nan() || hi.is_nan() || lo > hi || lo < *a || hi > *b {
                        return Err(Error::InvalidUtility(format!(
                            "interval [{lo}, {hi}] outside [{a}, {b}]"
                        )));
                    }
                    hi - lo
                }
                (Support::Interval { .. }, OutputRange::Finite(_)) => {
                    return Err(Error::InvalidUtility(
                        "interval piece in a finite range".into(),
                    ))
                }
                (Support::Atom(v), r) => {
                    if !r.contains(v) {
                        return Err(Error::InvalidUtility(format!("atom {v} outside range")));
                    }
                    if r.is_continuous() {
                        0.0
                    } else {
                        1.0
                    }
                }
            };
            pieces.push(Piece {
                support,
                measure,
                level,
            });
        }
        if !pieces.iter().any(|p| p.level == 0) {
            return Err(Error::InvalidUtility("no level-0 piece".into()));
        }
        if let OutputRange::Continuous { lo, hi } = range {
            let covered: f64 = pieces
                .iter()
                .filter(|p| matches!(p.support, Support::Interval { .. }))
                .map(|p| p.measure)
                .sum();
            if (covered - (hi - lo)).abs() > COVERAGE_TOL * (hi - lo).max(1.0) {
                return Err(Error::InvalidUtility(format!(
                    "intervals cover {covered}, range width is {}",
                    hi - lo
                )));
            }
        }
        Ok(StepUtility { pieces, range })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn range(&self) -> &OutputRange {
        &self.range
    }

    /// Level at `x`: the smallest level among pieces containing `x`, so shared
    /// boundary points take the better utility. `None` outside every piece.
    pub fn level_at(&self, x: f64) -> Option<u32> {
        self.pieces
            .iter()
            .filter(|p| p.support.contains(x))
            .map(|p| p.level)
            .min()
    }

    pub fn max_level(&self) -> u32 {
        self.pieces.iter().map(|p| p.level).max().unwrap_or(0)
    }

    /// Total measure of `{x : level(x) <= t}`.
    pub fn sublevel_measure(&self, t: u32) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.level <= t)
            .map(|p| p.measure)
            .sum()
    }

    /// Unnormalized log weight of every piece: `log measure - eps * level / 2`.
    pub fn log_weights(&self, epsilon: f64) -> Vec<f64> {
        self.pieces
            .iter()
            .map(|p| p.log_measure() - 0.5 * epsilon * f64::from(p.level))
            .collect()
    }

    /// Exact probability of each piece under the exponential mechanism.
    pub fn exact_em_probabilities(&self, epsilon: f64) -> Result<Vec<f64>> {
        exact_em_probabilities(self, epsilon)
    }
}

/// `log(sum(exp(xs)))`, ignoring `-inf` terms. Returns `-inf` if all are.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Probability of each piece (in piece order) under the exponential mechanism
/// with utility sensitivity 1.
pub fn exact_em_probabilities(u: &StepUtility, epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidPrivacy(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let logw = u.log_weights(epsilon);
    let norm = log_sum_exp(&logw);
    if norm == f64::NEG_INFINITY {
        return Err(Error::DegenerateUtility);
    }
    Ok(logw.iter().map(|w| (w - norm).exp()).collect())
}

/// One cell of a common refinement of two utilities on the same continuous range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedCell {
    pub lo: f64,
    pub hi: f64,
    pub level_a: u32,
    pub level_b: u32,
}

/// Splits the range at every interval endpoint of `a` and `b`, returning the
/// positive-length cells with the level each utility assigns to their interior.
pub fn common_refinement(a: &StepUtility, b: &StepUtility) -> Vec<RefinedCell> {
    let mut cuts: Vec<f64> = Vec::new();
    for p in a.pieces().iter().chain(b.pieces()) {
        if let Support::Interval { lo, hi } = p.support {
            cuts.push(lo);
            cuts.push(hi);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .filter_map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            Some(RefinedCell {
                lo: w[0],
                hi: w[1],
                level_a: interval_level_at(a, mid)?,
                level_b: interval_level_at(b, mid)?,
            })
        })
        .collect()
}

fn interval_level_at(u: &StepUtility, x: f64) -> Option<u32> {
    u.pieces()
        .iter()
        .filter(|p| matches!(p.support, Support::Interval { .. }) && p.support.contains(x))
        .map(|p| p.level)
        .min()
}
