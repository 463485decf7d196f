//! BER/SER performance models for photon-counting free-space optical links.
//!
//! This crate computes analytical error rates for two competing modulation
//! families used in space laser communications, and validates them against
//! independent numerical oracles:
//!
//! - **M-ary PPM** on a Poisson photon-counting channel: quantum limits,
//!   the 2-ary closed form (Marcum Q / Bessel), the exact M-ary symbol error
//!   rate with randomized tie-breaking, an orthogonal-signalling upper bound,
//!   and the SER → BER conversion ([`ppm`]).
//! - **Optically pre-amplified direct-detection DPSK** with ASE noise and
//!   in-band background light, plus the heterodyne result ([`dpsk`]).
//! - **Sky-background link budgets**: solid angle, noise photon rate, and
//!   per-symbol/per-slot background breakdowns for a telescope scenario
//!   ([`linkbudget`]).
//! - **Seeded Poisson Monte Carlo** simulation of M-ary PPM with a
//!   per-symbol splittable RNG (bit-identical tallies regardless of thread
//!   count or work partitioning), and a small-instance exhaustive
//!   enumeration oracle ([`mcsim`]).
//!
//! The numerical kernel ([`specfun`]) evaluates every Poisson quantity in
//! log space and derives tail probabilities from the regularized incomplete
//! gamma function, so the formulas stay accurate at operating points where
//! naive term summation overflows or cancels.
//!
//! The `photon-link` binary (see [`cli`]) exposes `table`, `curve`,
//! `simulate`, and `compare` subcommands emitting CSV/JSON.

pub mod cli;
pub mod dpsk;
pub mod linkbudget;
pub mod mcsim;
pub mod ppm;
pub mod specfun;

use std::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a function's domain (negative rate, bad order, ...).
    Domain(String),
    /// A scenario file or CLI configuration problem.
    Config(String),
    /// A computation produced a non-finite value that would otherwise be
    /// written to output.
    NonFinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite result: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
