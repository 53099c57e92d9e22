//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by construction, domain preconditions and numerical
/// routines. Every variant names the rule that failed so CLI consumers can
/// surface it directly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor argument violated its constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation required Dirichlet metadata (pole location r, residue A,
    /// D(0), D'(0)) that the weight sequence does not carry.
    #[error("weight sequence `{label}` has no Dirichlet metadata (required by {op})")]
    MissingMeta { op: &'static str, label: String },

    /// Exact counting requires integer type multiplicities.
    #[error("b_{k} = {value} is not a nonnegative integer ({context})")]
    NonIntegerWeight {
        k: u64,
        value: f64,
        context: &'static str,
    },

    /// Assembly counting requires m_k = b_k * k! to be a nonnegative integer.
    #[error("m_{k} = b_{k} * {k}! is not a nonnegative integer (assembly component counts must be integers)")]
    NonIntegerComponentCount { k: u64 },

    /// The saddle equation `E Z_n = n` has no solution for these weights.
    #[error("saddle equation unsolvable for n = {n}: sup of E Z_n over delta is {supremum} <= n ({rule})")]
    Unsolvable {
        n: u64,
        supremum: f64,
        rule: &'static str,
    },

    /// Requested the logarithm of a zero count.
    #[error("log of zero count c_{n} (no structure of size {n} exists)")]
    LogOfZero { n: u64 },

    /// Reconstruction from a zero point probability.
    #[error("point probability is zero; count reconstruction undefined")]
    ZeroProbability,

    /// Pole of a special function.
    #[error("{function} has a pole at {argument}")]
    Pole {
        function: &'static str,
        argument: f64,
    },

    /// Argument outside the convergence domain of an integral or series.
    #[error("{0}")]
    Domain(String),

    /// A size cap protecting an exponential or quadratic algorithm.
    #[error("n = {n} exceeds the limit {limit} for {op}")]
    TooLarge {
        n: u64,
        limit: u64,
        op: &'static str,
    },
}
