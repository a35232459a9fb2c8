use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the market model, the solvers and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("volatility matrix is singular or ill-conditioned (condition number {0:e})")]
    SingularVolatility(f64),
    #[error("net cash flow rate must be strictly negative, got {0}")]
    InvalidCashFlow(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("fictitious parameter outside the barrier cone: nu1 = {0}")]
    ConeViolation(f64),
    #[error("degenerate volatility: {0}")]
    DegenerateVolatility(String),
    #[error("argument outside the domain: {0}")]
    DomainViolation(String),
    #[error("invalid barriers: {0}")]
    InvalidBarriers(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("alpha is within tolerance of -1 (alpha = {0}); the value function degenerates")]
    LogOptimalDegeneracy(f64),
    #[error("regime violation: {0}")]
    RegimeViolation(String),
    #[error("favourability parameter is zero within tolerance (beta = {0:e})")]
    ZeroFavourability(f64),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("favourability condition violated: {0}")]
    FavourabilityViolation(String),
    #[error("root outside its admissible range: {0}")]
    RootOutOfRange(String),
    #[error("quadratic has no real roots (discriminant {0:e})")]
    NoRealRoots(f64),
    #[error("degenerate equation: {0}")]
    DegenerateEquation(String),
    #[error("drift does not point toward the barrier: {0}")]
    WrongDriftDirection(String),
    #[error("strategy violates the borrowing constraint: 1'w = {0}")]
    ConstraintViolation(f64),
}

/// Coarse classification used by front ends to map errors onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    /// Malformed or inconsistent inputs.
    Config,
    /// Inputs are well formed but the closed-form result does not apply.
    Regime,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SingularVolatility(_)
            | Error::InvalidCashFlow(_)
            | Error::DimensionMismatch(_)
            | Error::DomainViolation(_)
            | Error::InvalidBarriers(_)
            | Error::InvalidParameter(_)
            | Error::ConstraintViolation(_)
            | Error::DegenerateVolatility(_)
            | Error::WrongDriftDirection(_) => ErrorClass::Config,
            Error::ConeViolation(_)
            | Error::LogOptimalDegeneracy(_)
            | Error::RegimeViolation(_)
            | Error::ZeroFavourability(_)
            | Error::RegimeMismatch(_)
            | Error::FavourabilityViolation(_)
            | Error::RootOutOfRange(_)
            | Error::NoRealRoots(_)
            | Error::DegenerateEquation(_) => ErrorClass::Regime,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularVolatility(_) => "SingularVolatility",
            Error::InvalidCashFlow(_) => "InvalidCashFlow",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::ConeViolation(_) => "ConeViolation",
            Error::DegenerateVolatility(_) => "DegenerateVolatility",
            Error::DomainViolation(_) => "DomainViolation",
            Error::InvalidBarriers(_) => "InvalidBarriers",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::LogOptimalDegeneracy(_) => "LogOptimalDegeneracy",
            Error::RegimeViolation(_) => "RegimeViolation",
            Error::ZeroFavourability(_) => "ZeroFavourability",
            Error::RegimeMismatch(_) => "RegimeMismatch",
            Error::FavourabilityViolation(_) => "FavourabilityViolation",
            Error::RootOutOfRange(_) => "RootOutOfRange",
            Error::NoRealRoots(_) => "NoRealRoots",
            Error::DegenerateEquation(_) => "DegenerateEquation",
            Error::WrongDriftDirection(_) => "WrongDriftDirection",
            Error::ConstraintViolation(_) => "ConstraintViolation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
