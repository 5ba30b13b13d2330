use alloc::string::String;

use crate::divergence::Interval;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DivergenceError {
    #[error("unknown divergence `{0}`")]
    UnknownName(String),
    #[error("shape parameter {name} = {value} is outside {allowed}")]
    ShapeOutOfDomain {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },
    #[error("argument {0} must be strictly positive")]
    NonPositive(f64),
    #[error("t = {t} sits on the open boundary of {domain}")]
    OnBoundary { t: f64, domain: Interval },
    #[error("t = {t} lies outside {domain}")]
    OutsideDomain { t: f64, domain: Interval },
    #[error("Lambert W is undefined for x = {0} < -1/e")]
    LambertDomain(f64),
    #[error("Lambert W iteration did not converge for x = {0}")]
    LambertNoConvergence(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DensityError {
    #[error("mixture needs at least one component")]
    Empty,
    #[error("component lists have mismatched lengths ({weights} weights, {means} means, {variances} variances)")]
    LengthMismatch {
        weights: usize,
        means: usize,
        variances: usize,
    },
    #[error("weights must be non-negative and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("variance {0} must be finite and positive")]
    BadVariance(f64),
    #[error("mean {0} must be finite")]
    BadMean(f64),
    #[error("quadrature exceeded its budget of {0} panels")]
    QuadratureBudget(usize),
    #[error("invalid quadrature configuration: {0}")]
    BadQuadrature(&'static str),
    #[error("Nelder-Mead did not converge within {0} evaluations")]
    NoConvergence(usize),
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    #[error("layer dimensions must chain and be non-zero")]
    BadDims,
    #[error("parameter vector has {got} entries, expected {expected}")]
    ParamCount { expected: usize, got: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("upstream has {got} entries for a batch of {expected}")]
    UpstreamLength { expected: usize, got: usize },
    #[error("tape was recorded for different parameters")]
    TapeMismatch,
    #[error("network input width {0} is not supported here (expected 1)")]
    InputWidth(usize),
    #[error("unknown activation `{0}`")]
    UnknownActivation(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training diverged at step {step}: {reason}")]
    Diverged { step: usize, reason: &'static str },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SaddleError {
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(&'static str),
    #[error("rate bound violated at step {step}: J = {value:e} > {bound:e}")]
    RateViolation { step: usize, value: f64, bound: f64 },
    #[error("J increased at step {step}: {before:e} -> {after:e}")]
    NotMonotone { step: usize, before: f64, after: f64 },
}
