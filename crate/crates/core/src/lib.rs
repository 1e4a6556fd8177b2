//! Symbolic engine for constants built from algebraic numbers by iterated
//! exponentials and logarithms.
//!
//! The library locates such constants inside the exponential towers `E_n`
//! and the logarithmic towers `L_n` (both starting from the algebraic
//! closure of Q), extracts finite support sets one level down, and derives
//! machine-checkable certificates of Q-linear independence, algebraic
//! independence and tower non-membership.  Everything conditional is
//! conditional on Schanuel's Conjecture, which the engine applies as an
//! explicit axiom rule; a ball-arithmetic evaluator and an LLL-based
//! integer-relation search act as the numeric safety net.

pub mod algebraic;
pub mod ball;
pub mod engine;
pub mod numeric;
pub mod poly;
pub mod relation;
pub mod support;
pub mod term;
pub mod trace;

#[cfg(any(test, feature = "test-support"))]
pub mod testgen;
