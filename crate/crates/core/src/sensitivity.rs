//! Local and smooth sensitivity of the median, and the error-bound
//! diagnostics derived from them.

use serde::{Deserialize, Serialize};

use crate::duff::median_index;
use crate::error::{Error, Result};
use crate::types::Dataset;
use crate::utility::StepUtility;

fn continuous_width(s: &Dataset) -> f64 {
    let (lo, hi) = s
        .range()
        .bounds()
        .expect("median sensitivity needs a continuous range");
    hi - lo
}

/// Largest change of the median under one addition (any value in range) or
/// one removal. Only `y_{m-1}, y_m, y_{m+1}` matter.
pub fn local_sensitivity_median(s: &Dataset) -> f64 {
    let n = s.len();
    let m = median_index(n);
    if n % 2 == 1 {
        s.padded(m) - s.padded(m - 1)
    } else {
        s.padded(m + 1) - s.padded(m)
    }
}

/// `A[k]`: the largest median local sensitivity over datasets within `k`
/// edits, for `k` up to the first index where it reaches `b - a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityProfile {
    per_distance: Vec<f64>,
    global: f64,
}

impl SensitivityProfile {
    /// Builds the profile by scanning every pair of padded order statistics
    /// `(y_l, y_r)` that could become the median gap of a nearby dataset.
    ///
    /// Making `[y_l, y_r]` the gap costs removing everything strictly inside,
    /// then balancing `B` elements below against `C` above so that `C - B`
    /// is 1 (odd size, gap left of the median) or 0 (even size, gap right of
    /// it). Balancing adds copies of `a` or `b`, or removes outer elements
    /// while keeping `y_l` and `y_r` themselves.
    pub fn median(s: &Dataset) -> Self {
        let n = s.len();
        let global = continuous_width(s);
        let mut best_at_cost = vec![0.0f64; 2 * n + 4];
        for l in 0..=n {
            let below = l as i64;
            let below_min = i64::from(l >= 1);
            for r in (l + 1)..=(n + 1) {
                let above = (n + 1 - r) as i64;
                let above_min = i64::from(r <= n);
                let inside = (r - l - 1) as i64;
                let cost = inside + balance_cost(below, below_min, above, above_min);
                let gap = s.padded(r) - s.padded(l);
                let slot = &mut best_at_cost[cost as usize];
                *slot = slot.max(gap);
            }
        }
        let mut per_distance = Vec::new();
        let mut running = 0.0f64;
        for v in best_at_cost {
            running = running.max(v).min(global);
            per_distance.push(running);
            if running >= global {
                break;
            }
        }
        SensitivityProfile {
            per_distance,
            global,
        }
    }

    /// `A[k]`, which is `b - a` past the stored horizon.
    pub fn at(&self, k: usize) -> f64 {
        self.per_distance.get(k).copied().unwrap_or(self.global)
    }

    pub fn local(&self) -> f64 {
        self.per_distance[0]
    }

    pub fn global(&self) -> f64 {
        self.global
    }

    /// Index past which `A[k] = b - a`.
    pub fn horizon(&self) -> usize {
        self.per_distance.len()
    }

    /// `max_k exp(-beta k) A[k]`. The scan stops once `exp(-beta k) (b - a)`
    /// cannot beat the running maximum.
    pub fn smooth(&self, beta: f64) -> f64 {
        let mut best = 0.0f64;
        for k in 0.. {
            let decay = (-beta * k as f64).exp();
            if decay * self.global <= best {
                break;
            }
            best = best.max(decay * self.at(k));
        }
        best
    }
}

/// Minimum of `|B - below| + |C - above|` over `C - B` in `{0, 1}`, with
/// `B >= below_min`, `C >= above_min` and a nonempty result.
fn balance_cost(below: i64, below_min: i64, above: i64, above_min: i64) -> i64 {
    let mut best = i64::MAX;
    for delta in 0..=1 {
        let lower = below_min.max(above_min - delta).max(1 - delta).max(0);
        for b in [below, above - delta, lower] {
            let b = b.max(lower);
            let c = b + delta;
            best = best.min((b - below).abs() + (c - above).abs());
        }
    }
    best
}

/// Largest median local sensitivity within `k` edits of `s`.
pub fn ls_at_distance(s: &Dataset, k: usize) -> f64 {
    SensitivityProfile::median(s).at(k)
}

/// β-smooth sensitivity of the median.
pub fn smooth_sensitivity(s: &Dataset, beta: f64) -> f64 {
    SensitivityProfile::median(s).smooth(beta)
}

pub const BETA_STAR_BRACKET: (f64, f64) = (1e-8, 1e4);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaStar {
    pub beta: f64,
    /// False when `t` is outside the values `SS_β/β` takes on the bracket and
    /// `beta` is the nearest bracket end.
    pub in_range: bool,
}

/// Inverse of the strictly decreasing map `β ↦ SS_β / β`.
pub fn beta_star(profile: &SensitivityProfile, t: f64) -> Result<BetaStar> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::Domain(format!(
            "beta_star needs a positive finite t, got {t}"
        )));
    }
    let ratio = |log_beta: f64| {
        let beta = log_beta.exp();
        profile.smooth(beta) / beta
    };
    let (mut lo, mut hi) = (BETA_STAR_BRACKET.0.ln(), BETA_STAR_BRACKET.1.ln());
    if t >= ratio(lo) {
        return Ok(BetaStar {
            beta: BETA_STAR_BRACKET.0,
            in_range: false,
        });
    }
    if t <= ratio(hi) {
        return Ok(BetaStar {
            beta: BETA_STAR_BRACKET.1,
            in_range: false,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(BetaStar {
        beta: (0.5 * (lo + hi)).exp(),
        in_range: true,
    })
}

/// Principal branch of the Lambert W function for `x >= 0`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "lambert_w is only defined here for x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    // Newton until the step stops mattering at double precision.
    let mut w = x.ln_1p();
    for _ in 0..100 {
        let ew = w.exp();
        let step = (w * ew - x) / (ew * (w + 1.0));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    /// Upper bound on `P(|x - T(S)| > t)`, capped at 1.
    pub bound: f64,
    pub gamma: f64,
    pub beta: BetaStar,
    /// Measure of `{level <= floor(gamma)}`.
    pub sublevel_measure: f64,
    /// Set when that measure is zero and the bound is trivially 1.
    pub vacuous: bool,
}

/// Tail bound for the exponential mechanism with the median utility `u`:
/// `2 exp(-eps γ / 2) (b - a) / λ(H_γ)` with `γ = 1 / (2 β*(t / (e - 1)))`.
pub fn em_error_bound(s: &Dataset, u: &StepUtility, epsilon: f64, t: f64) -> Result<ErrorBound> {
    let (lo, hi) = s
        .range()
        .bounds()
        .ok_or_else(|| Error::Domain("error bound needs a continuous range".into()))?;
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let profile = SensitivityProfile::median(s);
    let beta = beta_star(&profile, t / (std::f64::consts::E - 1.0))?;
    let gamma = 1.0 / (2.0 * beta.beta);
    let floor = gamma.floor().min(f64::from(u32::MAX)) as u32;
    let measure = u.sublevel_measure(floor);
    if measure <= 0.0 {
        return Ok(ErrorBound {
            bound: 1.0,
            gamma,
            beta,
            sublevel_measure: 0.0,
            vacuous: true,
        });
    }
    let bound = 2.0 * (-epsilon * gamma / 2.0).exp() * (hi - lo) / measure;
    Ok(ErrorBound {
        bound: bound.min(1.0),
        gamma,
        beta,
        sublevel_measure: measure,
        vacuous: false,
    })
}

/// High-probability radius for the exponential mechanism when
/// `λ(H_t) >= C t`: `4 (e - 1) SS_{β_exp} / eps * W(eps (b - a) / (C η))`
/// with `β_exp = eps / (4 W(...))`.
pub fn corollary_radius(
    range_width: f64,
    epsilon: f64,
    eta: f64,
    c: f64,
    s: &Dataset,
) -> Result<f64> {
    if !(range_width > 0.0 && epsilon > 0.0 && c > 0.0) || !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(
            "corollary_radius needs positive inputs and eta in (0, 1)".into(),
        ));
    }
    let w = lambert_w(epsilon * range_width / (c * eta))?;
    let beta_exp = epsilon / (4.0 * w);
    let ss = smooth_sensitivity(s, beta_exp);
    Ok(4.0 * (std::f64::consts::E - 1.0) * ss / epsilon * w)
}

/// `scale * tan(π (1 - η) / 2)`: the `(1 - η)` quantile of `|scale * Cauchy|`.
pub fn cauchy_quantile_radius(scale: f64, eta: f64) -> Result<f64> {
    if scale.is_nan() || scale <= 0.0 || !(0.0..1.0).contains(&eta) || eta == 0.0 {
        return Err(Error::Domain(
            "cauchy_quantile_radius needs scale > 0 and eta in (0, 1)".into(),
        ));
    }
    Ok(scale * (std::f64::consts::FRAC_PI_2 * (1.0 - eta)).tan())
}

/// `C = 2 (b - a) / n`, the growth constant usually quoted for evenly spaced
/// data. Each gap away from the median costs the median utility two levels,
/// so the sublevel sets of evenly spaced data grow by only `(b - a) / n` per
/// level; [`sublevel_growth_constant`] measures the real value.
pub fn evenly_spaced_constant(range_width: f64, n: usize) -> f64 {
    2.0 * range_width / n as f64
}

/// Largest `C` with `λ(H_t) >= C t` for `t = 1..=t_max`.
pub fn sublevel_growth_constant(u: &StepUtility, t_max: u32) -> f64 {
    (1..=t_max.max(1))
        .map(|t| u.sublevel_measure(t) / f64::from(t))
        .fold(f64::INFINITY, f64::min)
}
