//! Exact-arithmetic efficiency analysis for random assignments.
//!
//! The library decides, for an assignment instance (strict preference
//! profile plus bistochastic matrix of exact rationals):
//!
//! * deterministic Pareto optimality, with trading-cycle witnesses;
//! * SD-efficiency, via trading cycles consistent with the assignment;
//! * robust ex post efficiency, exhaustively or through the
//!   agent-type-bounded polynomial algorithm;
//! * ex post efficiency, as exact convex-hull membership over the
//!   Pareto-optimal permutation matrices inside the support, returning a
//!   verifiable decomposition when the answer is yes.
//!
//! It also decomposes bistochastic matrices into convex combinations of
//! permutation matrices, and generates assignment instances from 3-CNF
//! formulas whose ex post efficiency encodes satisfiability.

pub mod birkhoff;
pub mod error;
pub mod expost;
pub mod format;
pub mod gen;
pub mod instance;
pub mod pareto;
pub mod rational;
pub mod render;
pub mod robust;
pub mod sat;
pub mod sdeff;
pub mod simplex;

pub use error::{Error, Result};
pub use instance::{
    sd_prefers, support, Decomposition, DeterministicAssignment, PreferenceProfile,
    RandomAssignment, SdComparison, SupportMask,
};
pub use rational::Rational;
