//! Closed-form utilities and sensitivities against brute-force edit searches.

use duff_core::oracle::{
    brute_force_ls_profile, dataset_distance_oracle, duff_oracle_levels, symmetric_difference, Grid,
};
use duff_core::{
    duff_mean, duff_median, duff_mode, Dataset, OutputRange, SensitivityProfile, StatisticKind,
};

/// Every multiset of size `1..=max_len` over `points`, sorted.
fn multisets(points: &[f64], max_len: usize) -> Vec<Vec<f64>> {
    fn go(points: &[f64], start: usize, left: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for i in start..points.len() {
            cur.push(points[i]);
            go(points, i, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(points, 0, max_len, &mut Vec::new(), &mut out);
    out
}

fn unit(values: &[f64]) -> Dataset {
    Dataset::new(values, OutputRange::continuous(0.0, 1.0).unwrap()).unwrap()
}

#[test]
fn distance_is_a_metric_on_small_grid() {
    let grid = Grid::new([0.0, 1.0, 2.0]);
    let sets = multisets(grid.points(), 3);
    let r = OutputRange::continuous(0.0, 2.0).unwrap();
    let ds: Vec<Dataset> = sets
        .iter()
        .map(|v| Dataset::new(v, r.clone()).unwrap())
        .collect();
    let d = |a: &Dataset, b: &Dataset| dataset_distance_oracle(a, b, &grid, 6).unwrap().unwrap();
    for a in &ds {
        assert_eq!(d(a, a), 0);
        for b in &ds {
            let ab = d(a, b);
            assert_eq!(ab, d(b, a));
            assert_eq!(ab as usize, symmetric_difference(a.values(), b.values()));
            for c in &ds {
                assert!(d(a, c) <= ab + d(b, c));
            }
        }
    }
}

#[test]
fn median_examples_agree_with_search() {
    let grid = Grid::linspace(0.0, 4.0, 8);
    for values in [vec![1.0, 2.0, 3.0], vec![1.0, 3.0]] {
        let s = Dataset::new(&values, OutputRange::continuous(0.0, 4.0).unwrap()).unwrap();
        let u = duff_median(&s).unwrap();
        let oracle = duff_oracle_levels(&s, StatisticKind::Median, &grid, 4).unwrap();
        for (x, o) in grid.points().iter().zip(oracle) {
            if let Some(o) = o {
                assert_eq!(u.level_at(*x), Some(o), "S={values:?} x={x}");
            }
        }
    }
}

#[test]
fn median_mode_mean_match_search_on_quarter_grid() {
    let grid = Grid::linspace(0.0, 1.0, 4);
    for values in multisets(grid.points(), 5) {
        let s = unit(&values);
        let median = duff_median(&s).unwrap();
        let mean = duff_mean(&s).unwrap();
        let labelled = Dataset::with_labels(
            &values,
            OutputRange::finite(grid.points().iter().copied()).unwrap(),
        )
        .unwrap();
        let mode = duff_mode(&labelled, grid.points()).unwrap();

        for (kind, u) in [
            (StatisticKind::Median, &median),
            (StatisticKind::Mode, &mode),
        ] {
            let oracle = duff_oracle_levels(&s, kind, &grid, 4).unwrap();
            for (x, o) in grid.points().iter().zip(oracle) {
                if let Some(o) = o {
                    assert_eq!(u.level_at(*x), Some(o), "{kind} S={values:?} x={x}");
                }
            }
        }
        let oracle = duff_oracle_levels(&s, StatisticKind::Mean, &grid, 4).unwrap();
        for (x, o) in grid.points().iter().zip(oracle) {
            let level = mean.level_at(*x).unwrap();
            if level <= 3 || o.is_some_and(|o| o <= 3) {
                assert_eq!(Some(level), o, "mean S={values:?} x={x}");
            }
        }
    }
}

#[test]
fn sensitivity_profile_matches_search() {
    let grid = Grid::linspace(0.0, 1.0, 4);
    for values in multisets(grid.points(), 4) {
        let s = unit(&values);
        let profile = SensitivityProfile::median(&s);
        let brute = brute_force_ls_profile(&s, &grid, 3).unwrap();
        for (k, b) in brute.iter().enumerate() {
            assert_eq!(profile.at(k), *b, "S={values:?} k={k}");
        }
    }
}

#[test]
fn saturation_example() {
    let grid = Grid::linspace(0.0, 4.0, 4);
    let s = Dataset::new(&[1.0, 2.0, 3.0], OutputRange::continuous(0.0, 4.0).unwrap()).unwrap();
    let brute = brute_force_ls_profile(&s, &grid, 5).unwrap();
    let profile = SensitivityProfile::median(&s);
    for (k, b) in brute.iter().enumerate() {
        assert_eq!(profile.at(k), *b);
    }
    assert_eq!(brute[5], 4.0);
}
