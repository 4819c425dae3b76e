//! Capacity-region computation for a three-receiver Gaussian broadcast channel
//! built from two parallel, unmatched degraded subchannels.
//!
//! The transmitter sends a common message (rate `R0`) to all three receivers
//! and one particular message (`R1`, `R2`, `R3`) to each. Receiver Y is the
//! strongest on subchannel 1 and the weakest on subchannel 2; receiver W is
//! the reverse; receiver Z sits in the middle on both. Superposition coding
//! over this topology yields a rate region cut out by thirteen log-ratio
//! bounds parameterized by per-subchannel power splits.
//!
//! The crate provides:
//!
//! * [`channel`] — channel parameters, power partitions, rate/weight vectors;
//! * [`rates`] — the thirteen bound functions, constraint reports, the
//!   common-rate cap, and the redundancy-gap identities;
//! * [`regions`] — the full region, the two one-constraint-removed regions,
//!   their partition-decoupled relaxations, and membership tests;
//! * [`gp`] — the log-domain convex (geometric-program) form of the relaxed
//!   weighted sum-rate problem, with analytic gradients and the transform
//!   Jacobian;
//! * [`solver`] — a log-barrier interior-point maximizer for the relaxation
//!   and a multi-start search for the single-partition (restricted) problem;
//! * [`kkt`] — KKT residuals for both the restricted and relaxed systems,
//!   closed-form multiplier patterns per weight ordering, and multiplier
//!   sign-structure checks;
//! * [`oracle`] — an independent brute-force reference: exact vertex
//!   enumeration of the rate polytope at a fixed partition plus grid search
//!   with local refinement over partitions.

pub mod channel;
pub mod gp;
pub mod kkt;
pub mod oracle;
pub mod rates;
pub mod regions;
pub mod sample;
pub mod solver;
pub mod tol;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A noise ladder fails strict degradedness `N_i^j < N_i^{j+1}`.
    #[error("degradedness violated on subchannel {i}: N{i}^{j} >= N{i}^{next}", next = j + 1)]
    DegradednessViolation { i: usize, j: usize },
    /// A power or noise variance is zero, negative, or non-finite.
    #[error("parameter {name} must be positive and finite, got {value}")]
    NonpositiveParameter { name: &'static str, value: f64 },
    /// Capacity function argument below zero.
    #[error("capacity argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    /// Common rate outside `[0, r0_max]`.
    #[error("R0 = {r0} outside the admissible range [0, {r0_max}]")]
    R0OutOfRange { r0: f64, r0_max: f64 },
    /// A region was handed the wrong kind of point.
    #[error("region {region} expects a {expected} point")]
    PointShapeMismatch {
        region: &'static str,
        expected: &'static str,
    },
    /// A recovered partition fraction left `[0, 1]`.
    #[error("recovered fraction {name} = {value} lies outside [0, 1]")]
    DomainViolation { name: String, value: f64 },
    /// Transform Jacobian requested at a non-interior partition point.
    #[error("jacobian requires strictly interior partitions: {0}")]
    SingularAtBoundary(String),
    /// No closed-form multiplier pattern exists for this ordering.
    #[error("no closed-form multiplier pattern for weight ordering {0}")]
    UnsupportedOrdering(&'static str),
    /// Tied weights have no strict ordering.
    #[error("weights must be strictly ordered; ties are rejected")]
    TiedWeights,
    /// The rate polytope at the given partition is empty.
    #[error("R0 = {r0} is infeasible at the given partition")]
    InfeasibleR0 { r0: f64 },
    /// Weight vector fails validation.
    #[error("invalid weights: {0}")]
    InvalidWeights(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use channel::{ChannelConfig, PowerPartition, RateVector, WeightVector};
pub use rates::{ConstraintId, ConstraintReport};
pub use regions::{RegionId, RelaxedPoint};
pub use solver::{SolveResult, SolveStatus};
