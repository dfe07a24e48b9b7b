use duff_core::utility::common_refinement;
use duff_core::{
    duff_mean, duff_median, duff_mode, eval_statistic, local_sensitivity_median, Dataset,
    OutputRange, SensitivityProfile, StatisticKind, StepUtility, Support,
};
use proptest::prelude::*;

fn unit(values: &[f64]) -> Dataset {
    Dataset::new(values, OutputRange::continuous(0.0, 1.0).unwrap()).unwrap()
}

/// Values on a 1/64 lattice so duplicates show up regularly.
fn dataset(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..=64).prop_map(|v| f64::from(v) / 64.0), 1..=max_len)
}

#[derive(Debug, Clone)]
enum Edit {
    Add(f64),
    Remove(prop::sample::Index),
}

fn edit() -> impl Strategy<Value = Edit> {
    prop_oneof![
        (0u32..=64).prop_map(|v| Edit::Add(f64::from(v) / 64.0)),
        any::<prop::sample::Index>().prop_map(Edit::Remove)
    ]
}

fn neighbor(s: &Dataset, e: &Edit) -> Option<Dataset> {
    match e {
        Edit::Add(v) => Some(s.with_added(*v)),
        Edit::Remove(i) => s.with_removed(i.index(s.len())),
    }
}

fn probe_points(s: &Dataset, t: &Dataset) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=500)
        .map(|i| i as f64 / 500.0 * 0.999_37 + 1e-4)
        .collect();
    xs.extend(s.values());
    xs.extend(t.values());
    xs.extend((0..=64).map(|i| i as f64 / 64.0));
    xs
}

fn interval_measure(u: &StepUtility) -> f64 {
    u.pieces()
        .iter()
        .filter(|p| matches!(p.support, Support::Interval { .. }))
        .map(|p| p.measure)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn median_utility_has_sensitivity_one(values in dataset(30), e in edit()) {
        let s = unit(&values);
        prop_assume!(neighbor(&s, &e).is_some());
        let t = neighbor(&s, &e).unwrap();
        let (us, ut) = (duff_median(&s).unwrap(), duff_median(&t).unwrap());
        for x in probe_points(&s, &t) {
            let (a, b) = (us.level_at(x).unwrap(), ut.level_at(x).unwrap());
            prop_assert!(a.abs_diff(b) <= 1, "x={} {} vs {}", x, a, b);
        }
    }

    #[test]
    fn mean_utility_has_sensitivity_one(values in dataset(12), e in edit()) {
        let s = unit(&values);
        prop_assume!(neighbor(&s, &e).is_some());
        let t = neighbor(&s, &e).unwrap();
        let (us, ut) = (duff_mean(&s).unwrap(), duff_mean(&t).unwrap());
        for x in probe_points(&s, &t) {
            let (a, b) = (us.level_at(x).unwrap(), ut.level_at(x).unwrap());
            prop_assert!(a.abs_diff(b) <= 1, "x={} {} vs {}", x, a, b);
        }
    }

    #[test]
    fn mode_utility_has_sensitivity_one(values in prop::collection::vec(0u32..5, 1..20), add in prop::option::of(0u32..5), idx in any::<prop::sample::Index>()) {
        let labels: Vec<f64> = (0..5).map(f64::from).collect();
        let range = OutputRange::finite(labels.clone()).unwrap();
        let raw: Vec<f64> = values.iter().map(|v| f64::from(*v)).collect();
        let s = Dataset::with_labels(&raw, range.clone()).unwrap();
        let t = match add {
            Some(v) => { let mut r = raw.clone(); r.push(f64::from(v)); Dataset::with_labels(&r, range).unwrap() }
            None => { prop_assume!(raw.len() > 1); let mut r = s.values().to_vec(); r.remove(idx.index(r.len())); Dataset::with_labels(&r, range).unwrap() }
        };
        let (us, ut) = (duff_mode(&s, &labels).unwrap(), duff_mode(&t, &labels).unwrap());
        for x in &labels {
            prop_assert!(us.level_at(*x).unwrap().abs_diff(ut.level_at(*x).unwrap()) <= 1);
        }
    }

    #[test]
    fn utilities_tile_the_range(values in dataset(60)) {
        let s = unit(&values);
        for u in [duff_median(&s).unwrap(), duff_mean(&s).unwrap()] {
            prop_assert!((interval_measure(&u) - 1.0).abs() < 1e-9);
            let p = u.exact_em_probabilities(1.3).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|q| *q >= 0.0));
        }
    }

    #[test]
    fn levels_grow_away_from_the_statistic(values in dataset(40)) {
        let s = unit(&values);
        for (kind, u) in [(StatisticKind::Median, duff_median(&s).unwrap()), (StatisticKind::Mean, duff_mean(&s).unwrap())] {
            let center = eval_statistic(&s, kind).unwrap();
            // Off-lattice probes avoid the null atoms of the mean utility.
            let xs: Vec<f64> = (0..997).map(|i| (i as f64 + 0.5) / 997.0).collect();
            let right: Vec<u32> = xs.iter().filter(|x| **x > center).map(|x| u.level_at(*x).unwrap()).collect();
            let left: Vec<u32> = xs.iter().rev().filter(|x| **x < center).map(|x| u.level_at(*x).unwrap()).collect();
            prop_assert!(right.windows(2).all(|w| w[0] <= w[1]), "{} right {:?}", kind, right);
            prop_assert!(left.windows(2).all(|w| w[0] <= w[1]), "{} left {:?}", kind, left);
        }
    }

    #[test]
    fn smooth_sensitivity_is_sandwiched(values in dataset(80), beta_i in 0usize..3) {
        let beta = [0.01, 0.1, 1.0][beta_i];
        let s = unit(&values);
        let p = SensitivityProfile::median(&s);
        let ss = p.smooth(beta);
        prop_assert!(local_sensitivity_median(&s) <= ss + 1e-15);
        prop_assert!(ss <= 1.0);
    }

    #[test]
    fn profile_is_monotone(values in dataset(80)) {
        let p = SensitivityProfile::median(&unit(&values));
        for k in 0..p.horizon() + 3 {
            prop_assert!(p.at(k) <= p.at(k + 1));
        }
        prop_assert_eq!(p.local(), local_sensitivity_median(&unit(&values)));
    }

    #[test]
    fn smooth_scan_truncation_is_exact(values in dataset(50), beta in 1e-4f64..5.0) {
        let p = SensitivityProfile::median(&unit(&values));
        let horizon = 2 * p.horizon() + 10;
        let full = (0..horizon).map(|k| (-beta * k as f64).exp() * p.at(k)).fold(0.0, f64::max);
        prop_assert_eq!(p.smooth(beta), full);
    }

    #[test]
    fn neighbors_change_em_law_by_at_most_e_eps(values in dataset(50), e in edit(), eps_i in 0usize..2) {
        let eps = [0.1, 1.0][eps_i];
        let s = unit(&values);
        prop_assume!(neighbor(&s, &e).is_some());
        let t = neighbor(&s, &e).unwrap();
        for (us, ut) in [(duff_median(&s).unwrap(), duff_median(&t).unwrap()), (duff_mean(&s).unwrap(), duff_mean(&t).unwrap())] {
            let zs = log_normalizer(&us, eps);
            let zt = log_normalizer(&ut, eps);
            for cell in common_refinement(&us, &ut) {
                let lp = (cell.hi - cell.lo).ln();
                let ps = (lp - 0.5 * eps * f64::from(cell.level_a) - zs).exp();
                let pt = (lp - 0.5 * eps * f64::from(cell.level_b) - zt).exp();
                prop_assert!(ps <= eps.exp() * pt * (1.0 + 1e-9));
                prop_assert!(pt <= eps.exp() * ps * (1.0 + 1e-9));
            }
        }
    }
}

fn log_normalizer(u: &StepUtility, eps: f64) -> f64 {
    duff_core::utility::log_sum_exp(&u.log_weights(eps))
}

#[test]
fn evenly_spaced_sublevel_growth() {
    // Each data gap away from the median costs two levels, so the sublevel
    // set grows by exactly one spacing per level.
    for n in [11usize, 50, 101] {
        let values: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let s = unit(&values);
        let u = duff_median(&s).unwrap();
        let spacing = 1.0 / (n - 1) as f64;
        for t in 1..=(n / 2) as u32 {
            let measure = u.sublevel_measure(t);
            assert!(
                (measure - f64::from(t) * spacing).abs() < 1e-9,
                "n={n} t={t} measure={measure}"
            );
            assert!(measure >= f64::from(t) / n as f64);
        }
    }
}
