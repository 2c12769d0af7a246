//! Certified numerical bounds for the Buchstab-function integrals that
//! control the largest prime factor of `n^2 + 1`.
//!
//! - [`enclosure`]: outward-rounded interval arithmetic.
//! - [`buchstab`]: a certified table of Buchstab's function `ω(u)`.
//! - [`sieve`]: the integrals `G0..G7`, their primed counterparts and the
//!   aggregate inequalities built from them.
//! - [`oracle`]: independent, uncertified cross-checks (Monte Carlo, plain
//!   Riemann sums, and a direct count over `n^2 + 1`).

pub mod buchstab;
pub mod cli;
pub mod enclosure;
pub mod error;
pub mod oracle;
pub mod report;
mod scalar;
pub mod sieve;

pub use buchstab::{BuchstabTable, GuardCounter};
pub use enclosure::Enclosure;
pub use error::{Error, Result};
pub use sieve::{
    compute_term, solve_tau, total_s, ComputeConfig, Mode, TermId, TermResult,
};
