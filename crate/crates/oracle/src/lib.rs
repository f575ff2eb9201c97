//! Independent brute-force evaluators and enumerators used to certify the
//! solver crates on small instances, plus seeded instance generators.
//!
//! Everything here re-derives its answers from raw model tables: transition
//! lookups, belief updates and the trajectory/plan recursions are written
//! from scratch rather than calling into the solver code paths, so an
//! agreement between the two is evidence, not tautology. Enumeration caps
//! fail loudly; a sampled oracle would not be an oracle.

use thiserror::Error;

pub mod gen;
pub mod mdp;
pub mod pomdp;
pub mod stoch;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} candidates exceed the enumeration cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
}

/// Default enumeration cap.
pub const DEFAULT_CAP: u128 = 1_000_000;
