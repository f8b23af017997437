//! Depth-optimized Grover-style search.
//!
//! Sequences of global and local Grover iterations are simulated exactly in
//! a three-dimensional subspace ([`dynamics`]) and priced by a circuit-depth
//! model ([`cost`]). The [`optimizer`] finds schedules with the lowest
//! expected depth, [`critical`] locates the oracle-to-diffusion ratio where
//! plain Grover becomes optimal, and [`parallel`] plans searches across
//! several machines. The guide in `book/` walks through each piece.

pub mod cost;
pub mod critical;
pub mod dynamics;
pub mod error;
pub mod optimizer;
pub mod parallel;
mod search;
pub mod sequence;
pub mod statevector;
pub mod theorems;

pub use cost::{AffineDepth, DepthBreakdown, DepthParams, GateDepthTable};
pub use dynamics::{Angles, Generator, Mat3, ReducedModel, ReducedState};
pub use error::{Error, Result};
pub use sequence::{Block, OpKind, OperatorCounts, SequenceSpec, TwoStagePlan};
pub use statevector::{StateVector, TargetSpec};

/// The guide's code samples, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/cost-model.md")]
    struct CostModel;
    #[doc = include_str!("../../../book/src/sequences.md")]
    struct Sequences;
    #[doc = include_str!("../../../book/src/reduced-model.md")]
    struct ReducedModel;
    #[doc = include_str!("../../../book/src/optimizer.md")]
    struct Optimizer;
    #[doc = include_str!("../../../book/src/critical-ratio.md")]
    struct CriticalRatio;
    #[doc = include_str!("../../../book/src/parallel.md")]
    struct Parallel;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
