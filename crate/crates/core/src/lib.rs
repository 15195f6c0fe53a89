//! Exact and asymptotic enumeration of multisets and selections.
//!
//! A family of combinatorial structures is described by a component-count
//! sequence `a_j` (the number of distinct component types of size `j`).
//! Multisets allow unlimited repetition of each component type; selections
//! allow each type at most once. This crate computes, for such a family:
//!
//! - exact counts `c_n` via the Euler-transform recurrence, with a
//!   brute-force oracle over integer partitions ([`exact`]);
//! - the tilted component distributions, the saddle point `sigma_n` with
//!   `E[Y_n] = n`, and the exact probabilistic identity
//!   `c_n = e^{n sigma} * prod_j (1 - e^{-j sigma})^{-a_j} * P(Y_n = n)`
//!   valid for every tilt `sigma > 0` ([`saddle`]);
//! - saddle-point and closed-form asymptotic estimates of `c_n`, including
//!   the Hardy-Ramanujan specialization for integer partitions
//!   ([`asymptotics`]);
//! - empirical verification of the ratio/limit laws and of the scaling
//!   exponents of `delta_n`, `B_n^2`, `rho_l` ([`diagnostics`]).
//!
//! All floating-point work uses arbitrary-precision arithmetic; precision
//! arguments are mantissa lengths in bits (default [`DEFAULT_PRECISION`]).

pub mod asymptotics;
pub mod diagnostics;
mod error;
pub mod exact;
pub mod hp;
pub mod saddle;
pub mod sequences;

pub use error::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 128;

/// Which product the counts come from: `prod (1-x^j)^{-a_j}` (multisets,
/// unlimited repetition) or `prod (1+x^j)^{a_j}` (selections, each
/// component type at most once).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Multiset,
    Selection,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Multiset => "multiset",
            Kind::Selection => "selection",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiset" => Ok(Kind::Multiset),
            "selection" => Ok(Kind::Selection),
            other => Err(Error::InvalidFamilyParams(format!(
                "unknown kind `{other}` (expected `multiset` or `selection`)"
            ))),
        }
    }
}
