//! Numerical tolerances shared across the crate.
//!
//! The constraint machinery and the solver terminate at different scales, so
//! activity detection is deliberately looser than feasibility: the barrier
//! targets stationarity near 1e-8, and a constraint that the solver left
//! within 1e-6 of its bound is treated as active.

/// Slack below `-FEASIBILITY` marks a violated constraint.
pub const FEASIBILITY: f64 = 1e-9;

/// A constraint with `|slack| <= ACTIVITY` is reported active.
pub const ACTIVITY: f64 = 1e-6;

/// Maximum KKT residual for a solve to count as converged.
pub const SOLVER_KKT: f64 = 1e-6;

/// Target duality-measure (barrier gap) at termination.
pub const BARRIER_GAP: f64 = 1e-9;

/// Relative agreement required between the two decompositions of the
/// four-message bound on the middle receiver's chain.
pub const CHAIN_IDENTITY_REL: f64 = 1e-12;

/// Round-trip error allowed through the log-domain change of variables.
pub const ROUNDTRIP: f64 = 1e-12;

/// Relative error allowed between analytic and central-difference gradients.
pub const GRADCHECK_REL: f64 = 1e-5;

/// Relative gap allowed between the relaxed optimum and the restricted
/// (single-partition) optimum when the tightness mechanism applies.
pub const TIGHTNESS_REL: f64 = 1e-3;

/// Multipliers below this are treated as exactly zero in sign-structure
/// checks of the relaxed KKT system.
pub const MULTIPLIER_ZERO: f64 = 1e-8;
