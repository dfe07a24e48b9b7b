use thiserror::Error;

/// Errors raised by dataset construction, utilities and mechanisms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("invalid privacy parameters: {0}")]
    InvalidPrivacy(String),
    #[error("statistic {stat} is not defined over a {range} range")]
    IncompatibleRange {
        stat: &'static str,
        range: &'static str,
    },
    #[error("value {0} is not one of the allowed labels")]
    UnknownLabel(f64),
    #[error("value {0} is not on the search grid")]
    OffGrid(f64),
    #[error("degenerate utility: every piece has zero measure")]
    DegenerateUtility,
    #[error("invalid utility: {0}")]
    InvalidUtility(String),
    #[error("infeasible (epsilon, delta): {0}")]
    Infeasible(String),
    #[error("strategy certification failed: {0}")]
    Certification(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
