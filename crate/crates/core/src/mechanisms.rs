//! Private releases: the exponential mechanism over step utilities, and
//! three smooth-sensitivity noise-addition baselines for the median.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::duff::{duff_utility, eval_statistic, StatisticKind};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sensitivity::SensitivityProfile;
use crate::types::{clamp_to_range, Dataset, OutputRange, PrivacyParams};
use crate::utility::{StepUtility, Support};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MechanismKind {
    #[serde(rename = "duff")]
    Duff,
    #[serde(rename = "ss-pure")]
    SmoothSensPure,
    #[serde(rename = "ss-approx")]
    SmoothSensApprox,
    #[serde(rename = "laplace-ln")]
    LaplaceLn,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 4] = [
        MechanismKind::Duff,
        MechanismKind::SmoothSensPure,
        MechanismKind::SmoothSensApprox,
        MechanismKind::LaplaceLn,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            MechanismKind::Duff => "duff",
            MechanismKind::SmoothSensPure => "ss-pure",
            MechanismKind::SmoothSensApprox => "ss-approx",
            MechanismKind::LaplaceLn => "laplace-ln",
        }
    }
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for MechanismKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        MechanismKind::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| format!("unknown mechanism `{s}`"))
    }
}

/// Parameters a release actually used. Absent fields do not apply.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamsUsed {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismResult {
    /// Released value, inside the output range.
    pub value: f64,
    /// Value before clamping to the range. Equal to `value` for the exponential mechanism.
    pub unclamped: f64,
    pub mechanism: MechanismKind,
    pub params_used: ParamsUsed,
    /// Seed of the stream the release drew from.
    pub seed_trace: u64,
}

/// Index minimizing `log log(1/U_i) - w_i` over independent open uniforms
/// `U_i`, which is distributed proportionally to `exp(w_i)`. Entries equal to
/// `-inf` never win and draw no uniform.
pub fn racing_argmin_weighted(log_weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, w) in log_weights.iter().enumerate() {
        if *w == f64::NEG_INFINITY {
            continue;
        }
        let z = (-rng.uniform_open().ln()).ln() - w;
        if best.is_none_or(|(_, b)| z < b) {
            best = Some((i, z));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::DegenerateUtility)
}

/// Samples `k` with probability proportional to `exp(log_measures[k] - eps k / 2)`.
pub fn racing_argmin(log_measures: &[f64], epsilon: f64, rng: &mut RngStream) -> Result<usize> {
    let weights: Vec<f64> = log_measures
        .iter()
        .enumerate()
        .map(|(k, m)| m - 0.5 * epsilon * k as f64)
        .collect();
    racing_argmin_weighted(&weights, rng)
}

/// Index of the piece chosen by the race, and the released value.
pub fn em_sample_piece(u: &StepUtility, epsilon: f64, rng: &mut RngStream) -> Result<(usize, f64)> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidPrivacy(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let idx = racing_argmin_weighted(&u.log_weights(epsilon), rng)?;
    let value = match u.pieces()[idx].support {
        Support::Interval { lo, hi } => (lo + rng.uniform_open() * (hi - lo)).clamp(lo, hi),
        Support::Atom(x) => x,
    };
    Ok((idx, value))
}

/// Exponential mechanism over a step utility of sensitivity 1.
pub fn em_sample(u: &StepUtility, epsilon: f64, rng: &mut RngStream) -> Result<MechanismResult> {
    let seed_trace = rng.seed();
    let (_, value) = em_sample_piece(u, epsilon, rng)?;
    Ok(MechanismResult {
        value,
        unclamped: value,
        mechanism: MechanismKind::Duff,
        params_used: ParamsUsed {
            epsilon: Some(epsilon),
            ..Default::default()
        },
        seed_trace,
    })
}

fn require_median(kind: StatisticKind, mechanism: MechanismKind) -> Result<()> {
    if kind != StatisticKind::Median {
        return Err(Error::Domain(format!(
            "{mechanism} only supports the median, not the {kind}"
        )));
    }
    Ok(())
}

/// Draw from the density proportional to `1 / (1 + |z|^gamma)`.
///
/// `gamma = 2` is the standard Cauchy. Otherwise rejection from the envelope
/// `min(1, |z|^-gamma)` (uniform core, Pareto tails), accepting with
/// probability `h / envelope >= 1/2`.
pub fn polynomial_tail_noise(gamma: f64, rng: &mut RngStream) -> f64 {
    if gamma == 2.0 {
        return rng.standard_cauchy();
    }
    // Core [-1, 1] has mass 2, tails beyond 1 have mass 2 / (gamma - 1).
    let core = 2.0;
    let tails = 2.0 / (gamma - 1.0);
    loop {
        let sign = if rng.uniform_open() < 0.5 { -1.0 } else { 1.0 };
        let z = if rng.uniform_open() * (core + tails) < core {
            rng.uniform_open()
        } else {
            rng.uniform_open().powf(-1.0 / (gamma - 1.0))
        };
        let envelope = if z <= 1.0 { 1.0 } else { z.powf(-gamma) };
        if rng.uniform_open() * envelope <= 1.0 / (1.0 + z.powf(gamma)) {
            return sign * z;
        }
    }
}

/// `(eps, 0)`-DP median: `T(S) + SS_β / α * Z` with `Z ~ h_γ` and
/// `α = β = eps / (2 (γ + 1))`.
pub fn smoothsens_pure(
    s: &Dataset,
    epsilon: f64,
    gamma: f64,
    rng: &mut RngStream,
) -> Result<MechanismResult> {
    let prepared = Prepared::smoothsens_pure(s, &SensitivityProfile::median(s), epsilon, gamma)?;
    prepared.release(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
    /// `SS_β / α` at the chosen pair.
    pub objective: f64,
}

/// Largest `α` allowed for `β` under `eps >= α + (e^β - 1) ln(1/δ) - β`.
pub fn approx_alpha(epsilon: f64, delta: f64, beta: f64) -> f64 {
    epsilon + beta - beta.exp_m1() * (1.0 / delta).ln()
}

pub const ALPHA_BETA_GRID: usize = 200;

/// Minimizes `SS_β / α` for the `(eps, δ)` smooth-sensitivity Laplace mechanism.
///
/// Scans a log grid of β in `[1e-6, eps]` with `α` at the constraint
/// boundary, then runs a golden-section pass between the grid neighbours of
/// the best point.
pub fn optimize_alpha_beta(
    profile: &SensitivityProfile,
    epsilon: f64,
    delta: f64,
) -> Result<AlphaBeta> {
    PrivacyParams::new(epsilon, delta)?;
    if delta <= 0.0 {
        return Err(Error::Infeasible(
            "the approximate mechanism needs delta > 0".into(),
        ));
    }
    let objective = |log_beta: f64| {
        let beta = log_beta.exp();
        let alpha = approx_alpha(epsilon, delta, beta);
        if alpha > 0.0 {
            profile.smooth(beta) / alpha
        } else {
            f64::INFINITY
        }
    };
    let (lo, hi) = (1e-6f64.ln(), epsilon.ln());
    if hi <= lo {
        return Err(Error::Infeasible(format!(
            "epsilon {epsilon} is below the beta grid"
        )));
    }
    let grid: Vec<f64> = (0..ALPHA_BETA_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (ALPHA_BETA_GRID - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|b| objective(*b)).collect();
    let (best_i, best_v) = values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    if !best_v.is_finite() {
        return Err(Error::Infeasible(format!(
            "no beta gives alpha > 0 for eps={epsilon}, delta={delta}"
        )));
    }
    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(grid.len() - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = objective(d);
        }
    }
    let (log_beta, value) = [(grid[best_i], best_v), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("candidates");
    let beta = log_beta.exp();
    Ok(AlphaBeta {
        alpha: approx_alpha(epsilon, delta, beta),
        beta,
        objective: value,
    })
}

/// `(eps, δ)`-DP median: `T(S) + SS_β / α * Laplace(0, 1)` with the
/// optimized `(α, β)`.
pub fn smoothsens_approx(
    s: &Dataset,
    privacy: PrivacyParams,
    rng: &mut RngStream,
) -> Result<MechanismResult> {
    let prepared = Prepared::smoothsens_approx(s, &SensitivityProfile::median(s), privacy)?;
    prepared.release(rng)
}

/// `ρ` such that `ρ`-zCDP implies `(eps, δ)`-DP via `eps = ρ + 2 sqrt(ρ ln(1/δ))`.
pub fn zcdp_rho_for(epsilon: f64, delta: f64) -> f64 {
    let l = (1.0 / delta).ln();
    ((l + epsilon).sqrt() - l.sqrt()).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlnParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
}

/// Chooses and certifies Laplace-log-normal parameters for a zCDP budget `rho`.
pub trait LlnStrategy {
    fn choose(&self, profile: &SensitivityProfile, epsilon: f64, rho: f64) -> Result<LlnParams>;

    /// Whether `params` meet the budget `rho`.
    fn certify(&self, params: &LlnParams, rho: f64) -> bool;
}

/// zCDP cost `ρ = (β/σ + exp(1.5 σ²) α)² / 2` of the Laplace-log-normal
/// release with smoothing `β` and scale divisor `α`.
pub fn lln_rho(params: &LlnParams) -> f64 {
    let eps = params.beta / params.sigma + (1.5 * params.sigma * params.sigma).exp() * params.alpha;
    0.5 * eps * eps
}

/// Grid search over σ in `[0.1, 2]` and β in `(0, eps]`, taking the largest
/// `α` that [`lln_rho`] admits and minimizing `SS_β / α`.
#[derive(Debug, Clone, Copy)]
pub struct GridLlnStrategy {
    pub sigma_steps: usize,
    pub beta_steps: usize,
}

impl Default for GridLlnStrategy {
    fn default() -> Self {
        GridLlnStrategy {
            sigma_steps: 40,
            beta_steps: 100,
        }
    }
}

impl LlnStrategy for GridLlnStrategy {
    fn choose(&self, profile: &SensitivityProfile, epsilon: f64, rho: f64) -> Result<LlnParams> {
        let budget = (2.0 * rho).sqrt();
        let mut best: Option<(f64, LlnParams)> = None;
        for si in 0..self.sigma_steps {
            let sigma = 0.1 + 1.9 * si as f64 / (self.sigma_steps - 1).max(1) as f64;
            let inflation = (1.5 * sigma * sigma).exp();
            for bi in 1..=self.beta_steps {
                // log grid on [eps * 1e-4, eps]
                let beta = epsilon * 1e-4f64.powf(1.0 - bi as f64 / self.beta_steps as f64);
                // shave a relative 1e-12 so the certificate holds after rounding
                let alpha = (budget - beta / sigma) / inflation * (1.0 - 1e-12);
                if alpha <= 0.0 {
                    continue;
                }
                let scale = profile.smooth(beta) / alpha;
                if best.is_none_or(|(b, _)| scale < b) {
                    best = Some((scale, LlnParams { alpha, beta, sigma }));
                }
            }
        }
        best.map(|(_, p)| p)
            .ok_or_else(|| Error::Infeasible(format!("no LLN parameters fit rho = {rho}")))
    }

    fn certify(&self, params: &LlnParams, rho: f64) -> bool {
        params.alpha > 0.0 && params.beta > 0.0 && params.sigma > 0.0 && lln_rho(params) <= rho
    }
}

/// Fixed parameters, certified with [`lln_rho`].
#[derive(Debug, Clone, Copy)]
pub struct FixedLlnStrategy(pub LlnParams);

impl LlnStrategy for FixedLlnStrategy {
    fn choose(&self, _: &SensitivityProfile, _: f64, _: f64) -> Result<LlnParams> {
        Ok(self.0)
    }

    fn certify(&self, params: &LlnParams, rho: f64) -> bool {
        lln_rho(params) <= rho
    }
}

/// `X * exp(σ Y)` with `X ~ Laplace(0, 1)`, `Y ~ N(0, 1)`.
pub fn laplace_log_normal_noise(sigma: f64, rng: &mut RngStream) -> f64 {
    let x = rng.standard_laplace();
    let y = rng.standard_normal();
    x * (sigma * y).exp()
}

/// Median release `T(S) + SS_β / α * X exp(σ Y)` with parameters from `strategy`.
pub fn laplace_ln(
    s: &Dataset,
    privacy: PrivacyParams,
    strategy: &dyn LlnStrategy,
    rng: &mut RngStream,
) -> Result<MechanismResult> {
    let prepared = Prepared::laplace_ln(s, &SensitivityProfile::median(s), privacy, strategy)?;
    prepared.release(rng)
}

/// Standardized noise shape of an additive release.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    PolynomialTail { gamma: f64 },
    Laplace,
    LaplaceLogNormal { sigma: f64 },
}

/// A mechanism with its data-dependent parameters computed once, ready to
/// release repeatedly from independent streams.
#[derive(Debug, Clone)]
pub enum Prepared {
    Exponential {
        utility: StepUtility,
        epsilon: f64,
    },
    Additive {
        center: f64,
        scale: f64,
        noise: Noise,
        range: OutputRange,
        kind: MechanismKind,
        params: ParamsUsed,
    },
}

impl Prepared {
    pub fn new(
        s: &Dataset,
        statistic: StatisticKind,
        mechanism: MechanismKind,
        privacy: PrivacyParams,
        strategy: &dyn LlnStrategy,
    ) -> Result<Self> {
        if mechanism == MechanismKind::Duff {
            return Ok(Prepared::Exponential {
                utility: duff_utility(s, statistic)?,
                epsilon: privacy.epsilon(),
            });
        }
        require_median(statistic, mechanism)?;
        let profile = SensitivityProfile::median(s);
        match mechanism {
            MechanismKind::SmoothSensPure => {
                Prepared::smoothsens_pure(s, &profile, privacy.epsilon(), 2.0)
            }
            MechanismKind::SmoothSensApprox => Prepared::smoothsens_approx(s, &profile, privacy),
            MechanismKind::LaplaceLn => Prepared::laplace_ln(s, &profile, privacy, strategy),
            MechanismKind::Duff => unreachable!(),
        }
    }

    pub fn smoothsens_pure(
        s: &Dataset,
        profile: &SensitivityProfile,
        epsilon: f64,
        gamma: f64,
    ) -> Result<Self> {
        PrivacyParams::pure(epsilon)?;
        if gamma.is_nan() || gamma <= 1.0 {
            return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
        }
        let ab = epsilon / (2.0 * (gamma + 1.0));
        let scale = profile.smooth(ab) / ab;
        Ok(Prepared::Additive {
            center: eval_statistic(s, StatisticKind::Median)?,
            scale,
            noise: Noise::PolynomialTail { gamma },
            range: s.range().clone(),
            kind: MechanismKind::SmoothSensPure,
            params: ParamsUsed {
                epsilon: Some(epsilon),
                delta: Some(0.0),
                alpha: Some(ab),
                beta: Some(ab),
                gamma: Some(gamma),
                noise_scale: Some(scale),
                ..Default::default()
            },
        })
    }

    pub fn smoothsens_approx(
        s: &Dataset,
        profile: &SensitivityProfile,
        privacy: PrivacyParams,
    ) -> Result<Self> {
        let ab = optimize_alpha_beta(profile, privacy.epsilon(), privacy.delta())?;
        let scale = profile.smooth(ab.beta) / ab.alpha;
        Ok(Prepared::Additive {
            center: eval_statistic(s, StatisticKind::Median)?,
            scale,
            noise: Noise::Laplace,
            range: s.range().clone(),
            kind: MechanismKind::SmoothSensApprox,
            params: ParamsUsed {
                epsilon: Some(privacy.epsilon()),
                delta: Some(privacy.delta()),
                alpha: Some(ab.alpha),
                beta: Some(ab.beta),
                noise_scale: Some(scale),
                ..Default::default()
            },
        })
    }

    pub fn laplace_ln(
        s: &Dataset,
        profile: &SensitivityProfile,
        privacy: PrivacyParams,
        strategy: &dyn LlnStrategy,
    ) -> Result<Self> {
        if privacy.delta() <= 0.0 {
            return Err(Error::Infeasible("laplace-ln needs delta > 0".into()));
        }
        let rho = zcdp_rho_for(privacy.epsilon(), privacy.delta());
        let p = strategy.choose(profile, privacy.epsilon(), rho)?;
        if !strategy.certify(&p, rho) {
            return Err(Error::Certification(format!(
                "alpha={}, beta={}, sigma={} exceed rho={rho}",
                p.alpha, p.beta, p.sigma
            )));
        }
        let scale = profile.smooth(p.beta) / p.alpha;
        Ok(Prepared::Additive {
            center: eval_statistic(s, StatisticKind::Median)?,
            scale,
            noise: Noise::LaplaceLogNormal { sigma: p.sigma },
            range: s.range().clone(),
            kind: MechanismKind::LaplaceLn,
            params: ParamsUsed {
                epsilon: Some(privacy.epsilon()),
                delta: Some(privacy.delta()),
                alpha: Some(p.alpha),
                beta: Some(p.beta),
                sigma: Some(p.sigma),
                rho: Some(rho),
                noise_scale: Some(scale),
                ..Default::default()
            },
        })
    }

    pub fn kind(&self) -> MechanismKind {
        match self {
            Prepared::Exponential { .. } => MechanismKind::Duff,
            Prepared::Additive { kind, .. } => *kind,
        }
    }

    pub fn params(&self) -> ParamsUsed {
        match self {
            Prepared::Exponential { epsilon, .. } => ParamsUsed {
                epsilon: Some(*epsilon),
                ..Default::default()
            },
            Prepared::Additive { params, .. } => *params,
        }
    }

    pub fn release(&self, rng: &mut RngStream) -> Result<MechanismResult> {
        match self {
            Prepared::Exponential { utility, epsilon } => em_sample(utility, *epsilon, rng),
            Prepared::Additive {
                center,
                scale,
                noise,
                range,
                kind,
                params,
            } => {
                let seed_trace = rng.seed();
                let z = match *noise {
                    Noise::PolynomialTail { gamma } => polynomial_tail_noise(gamma, rng),
                    Noise::Laplace => rng.standard_laplace(),
                    Noise::LaplaceLogNormal { sigma } => laplace_log_normal_noise(sigma, rng),
                };
                let unclamped = center + scale * z;
                Ok(MechanismResult {
                    value: clamp_to_range(unclamped, range),
                    unclamped,
                    mechanism: *kind,
                    params_used: *params,
                    seed_trace,
                })
            }
        }
    }
}
