//! Invariants of virtual knot and link diagrams.
//!
//! Diagrams enter as signed Gauss codes ([`codec`]) and are stored as port
//! pairings ([`diagram`]).  On top of that sit the generalized bracket
//! polynomial and its parallel-cable extensions ([`bracket`]), peripheral
//! group presentations with finite-quotient counting ([`wirtinger`]), and a
//! first-homology obstruction extracted from the carrying surface
//! ([`carrier`]).  [`builtins`] ships the named example diagrams and the
//! twisted families used throughout the test suite and the `vkt` binary.

pub mod bracket;
pub mod builtins;
pub mod carrier;
pub mod codec;
pub mod diagram;
pub mod laurent;
pub mod moves;
pub mod snf;
pub mod wirtinger;

use thiserror::Error;

/// Raised when an exact computation would exceed a configured bound instead
/// of silently degrading.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("{what} too large: {size} exceeds limit {limit}")]
pub struct TooLarge {
    pub what: &'static str,
    pub size: usize,
    pub limit: usize,
}
