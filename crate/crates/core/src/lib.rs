//! Differentially private statistics with the exponential mechanism over
//! dataset-distance utilities.
//!
//! The utility of an output `x` is minus the number of add/remove edits
//! needed to reach a dataset whose statistic is `x`. For the median, mode and
//! mean it is a step function ([`StepUtility`]) and the mechanism is sampled
//! exactly with a log-space race ([`mechanisms::racing_argmin`]). Smooth
//! sensitivity baselines and brute-force oracles live alongside.

pub mod duff;
pub mod error;
pub mod mechanisms;
pub mod oracle;
pub mod rng;
pub mod sensitivity;
pub mod types;
pub mod utility;

pub use duff::{
    duff_mean, duff_median, duff_mode, duff_utility, eval_statistic, median_index, StatisticKind,
};
pub use error::{Error, Result};
pub use mechanisms::{
    em_sample, laplace_ln, optimize_alpha_beta, racing_argmin, smoothsens_approx, smoothsens_pure,
    GridLlnStrategy, LlnStrategy, MechanismKind, MechanismResult, ParamsUsed, Prepared,
};
pub use rng::{derive_seed, RngStream};
pub use sensitivity::{
    beta_star, cauchy_quantile_radius, corollary_radius, em_error_bound, evenly_spaced_constant,
    lambert_w, local_sensitivity_median, ls_at_distance, smooth_sensitivity,
    sublevel_growth_constant, SensitivityProfile,
};
pub use types::{clamp_to_range, Dataset, OutputRange, PrivacyParams};
pub use utility::{exact_em_probabilities, Piece, StepUtility, Support};
