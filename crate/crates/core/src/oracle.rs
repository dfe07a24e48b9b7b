//! Brute-force breadth-first searches over add/remove edit paths.
//!
//! These are exponential in the search depth and only meant for small
//! datasets on a small grid of values. They are the reference the closed-form
//! utilities and sensitivities are checked against.

use std::collections::{HashSet, VecDeque};

use crate::duff::{median_index, StatisticKind};
use crate::error::{Error, Result};
use crate::types::Dataset;

/// A multiset over a fixed grid, as per-grid-point counts.
type Counts = Vec<u8>;

/// Sorted, deduplicated search grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(Vec<f64>);

impl Grid {
    pub fn new(points: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = points.into_iter().collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        Grid(v)
    }

    /// `steps + 1` evenly spaced points from `lo` to `hi`.
    pub fn linspace(lo: f64, hi: f64, steps: usize) -> Self {
        Grid::new((0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64))
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    fn index_of(&self, x: f64) -> Option<usize> {
        self.0.binary_search_by(|p| p.total_cmp(&x)).ok()
    }

    fn counts(&self, values: &[f64]) -> Result<Counts> {
        let mut counts = vec![0u8; self.0.len()];
        for v in values {
            let i = self.index_of(*v).ok_or(Error::OffGrid(*v))?;
            counts[i] += 1;
        }
        Ok(counts)
    }

    fn expand(&self, counts: &Counts) -> Vec<f64> {
        counts
            .iter()
            .zip(&self.0)
            .flat_map(|(c, v)| std::iter::repeat_n(*v, *c as usize))
            .collect()
    }
}

/// Every multiset one add or remove away from `counts`.
fn neighbors(counts: &Counts) -> impl Iterator<Item = Counts> + '_ {
    (0..counts.len()).flat_map(move |i| {
        let mut up = counts.clone();
        up[i] += 1;
        let down = (counts[i] > 0).then(|| {
            let mut d = counts.clone();
            d[i] -= 1;
            d
        });
        std::iter::once(up).chain(down)
    })
}

/// Visits every multiset within `max_depth` edits of `start`, once, in BFS order.
fn bfs(start: Counts, max_depth: u32, mut visit: impl FnMut(&Counts, u32) -> bool) {
    let mut seen: HashSet<Counts> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back((start, 0));
    while let Some((state, depth)) = queue.pop_front() {
        if visit(&state, depth) {
            return;
        }
        if depth == max_depth {
            continue;
        }
        for next in neighbors(&state) {
            if seen.insert(next.clone()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
}

/// Size of the multiset symmetric difference, counted with multiplicity.
pub fn symmetric_difference(a: &[f64], b: &[f64]) -> usize {
    let grid = Grid::new(a.iter().chain(b).copied());
    let ca = grid.counts(a).expect("on grid");
    let cb = grid.counts(b).expect("on grid");
    ca.iter()
        .zip(&cb)
        .map(|(x, y)| x.abs_diff(*y) as usize)
        .sum()
}

/// Shortest add/remove edit path from `s` to `t`, or `None` past `max_depth`.
pub fn dataset_distance_oracle(
    s: &Dataset,
    t: &Dataset,
    grid: &Grid,
    max_depth: u32,
) -> Result<Option<u32>> {
    let from = grid.counts(s.values())?;
    let to = grid.counts(t.values())?;
    let mut found = None;
    bfs(from, max_depth, |state, depth| {
        if *state == to {
            found = Some(depth);
            true
        } else {
            false
        }
    });
    if let Some(d) = found {
        debug_assert_eq!(d as usize, symmetric_difference(s.values(), t.values()));
    }
    Ok(found)
}

/// Whether the statistic of the (nonempty) sorted multiset `values` equals `x`.
fn statistic_hits(values: &[f64], kind: StatisticKind, x: f64) -> bool {
    match kind {
        StatisticKind::Median => values[median_index(values.len()) - 1] == x,
        StatisticKind::Mean => {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            (mean - x).abs() <= 1e-9 * (1.0 + x.abs())
        }
        StatisticKind::Mode => {
            let count = |v: f64| values.iter().filter(|y| **y == v).count();
            let cx = count(x);
            cx > 0 && values.iter().all(|y| count(*y) <= cx)
        }
    }
}

/// Minimum number of edits (adding only grid values) that gives a dataset
/// whose statistic is `x`, or `None` if none exists within `max_depth`.
/// Mode targets count as hit when `x` attains the maximal count.
pub fn duff_oracle(
    s: &Dataset,
    kind: StatisticKind,
    x: f64,
    grid: &Grid,
    max_depth: u32,
) -> Result<Option<u32>> {
    let start = grid.counts(s.values())?;
    let mut found = None;
    bfs(start, max_depth, |state, depth| {
        let values = grid.expand(state);
        if !values.is_empty() && statistic_hits(&values, kind, x) {
            found = Some(depth);
            true
        } else {
            false
        }
    });
    Ok(found)
}

/// [`duff_oracle`] for every grid point at once, from a single search.
pub fn duff_oracle_levels(
    s: &Dataset,
    kind: StatisticKind,
    grid: &Grid,
    max_depth: u32,
) -> Result<Vec<Option<u32>>> {
    let start = grid.counts(s.values())?;
    let mut levels: Vec<Option<u32>> = vec![None; grid.points().len()];
    bfs(start, max_depth, |state, depth| {
        let values = grid.expand(state);
        if values.is_empty() {
            return false;
        }
        for (i, x) in grid.points().iter().enumerate() {
            if levels[i].is_none() && statistic_hits(&values, kind, *x) {
                levels[i] = Some(depth);
            }
        }
        levels.iter().all(Option::is_some)
    });
    Ok(levels)
}

/// Local sensitivity of the median by enumerating every neighbor: each single
/// removal and each single addition of a grid value.
pub fn brute_force_median_ls(values: &[f64], grid: &Grid) -> f64 {
    let med = |v: &[f64]| v[median_index(v.len()) - 1];
    let base = med(values);
    let mut best: f64 = 0.0;
    for i in 0..values.len() {
        if values.len() > 1 {
            let mut v = values.to_vec();
            v.remove(i);
            best = best.max((med(&v) - base).abs());
        }
    }
    for z in grid.points() {
        let mut v = values.to_vec();
        v.push(*z);
        v.sort_by(f64::total_cmp);
        best = best.max((med(&v) - base).abs());
    }
    best
}

/// Largest median local sensitivity among datasets within `k` edits, for
/// `k = 0..=max_k`. Grid must contain the range endpoints.
pub fn brute_force_ls_profile(s: &Dataset, grid: &Grid, max_k: u32) -> Result<Vec<f64>> {
    let start = grid.counts(s.values())?;
    let mut per_depth = vec![0.0f64; max_k as usize + 1];
    bfs(start, max_k, |state, depth| {
        let values = grid.expand(state);
        if !values.is_empty() {
            let ls = brute_force_median_ls(&values, grid);
            let slot = &mut per_depth[depth as usize];
            *slot = slot.max(ls);
        }
        false
    });
    for k in 1..per_depth.len() {
        per_depth[k] = per_depth[k].max(per_depth[k - 1]);
    }
    Ok(per_depth)
}
