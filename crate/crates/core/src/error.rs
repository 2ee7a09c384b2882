//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of the evaluation and verification engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at argument {0}")]
    Pole(f64),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("vanishing sine denominator at {0}")]
    Degenerate(f64),

    #[error("point within {tol:e} of the singular hyperplane {what}")]
    NearSingular { what: String, tol: f64 },

    #[error("directional limits disagree: {first} vs {second}")]
    LimitDisagreement { first: f64, second: f64 },

    #[error("triple ({l1},{l2},{m}) is not admissible for (k1,k2)=({k1},{k2})")]
    InadmissibleTriple {
        l1: usize,
        l2: usize,
        m: usize,
        k1: usize,
        k2: usize,
    },

    #[error("quadrature node landed on a singular facet: {0}")]
    IntegrandSingular(String),

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("pivot coefficient {value:e} below the genericity guard in {relation}")]
    PivotZero { relation: String, value: f64 },

    #[error("relation {relation} has relative residual {residual:e}")]
    InconsistentSystem { relation: String, residual: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
