//! Exact counting and asymptotic enumeration of decomposable combinatorial
//! structures.
//!
//! The library covers the three classic structure types: multisets (weighted
//! partitions counted by `prod_k (1-z^k)^{-b_k}`), selections (counted by
//! `prod_k (1+z^k)^{b_k}`) and assemblies (labelled structures with
//! exponential generating function `exp(sum_k m_k z^k / k!)`), all driven by
//! a nonnegative weight sequence `b_k`.
//!
//! Functionality is split into:
//!
//! - [`weights`]: weight sequences, Dirichlet metadata and built-in families;
//! - [`exact`]: exact counts `c_n` by divisor-sum recurrences plus a
//!   brute-force enumeration oracle;
//! - [`special`]: real-argument Γ, ζ, ζ′ and the Bose-gas log integral;
//! - [`khintchine`]: tilted component ensembles, the saddle equation
//!   `E Z_n = n`, the lattice point probability `P(Z_n = n)` and the
//!   characteristic function;
//! - [`asymptotics`]: closed-form expansions of `log F(δ)`, the saddle
//!   asymptotics, and the final count estimates;
//! - [`verify`]: numerical verification of the trigonometric-sum conditions,
//!   the characteristic-function modulus bound and the local limit theorem.
//!
//! Grid scans and quadratures run data-parallel via rayon by default; build
//! with `--no-default-features` for a fully sequential library with identical
//! results (chunked deterministic reduction is used in both modes).

pub mod asymptotics;
pub mod error;
pub mod exact;
mod exec;
pub mod khintchine;
pub mod special;
mod util;
pub mod verify;
pub mod weights;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
