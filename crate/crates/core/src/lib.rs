//! Constrained forecast-combination weights.
//!
//! Every estimation criterion (least squares, generalized Mallows, leave-one-out
//! cross-validation, performance-based and eigenvector weights) can be paired with
//! one of six weight spaces: unconstrained, unconstrained with an intercept,
//! sum-to-one, unit box, probability simplex and unit sphere.
//!
//! The crate is `no_std` with `alloc`; file formats, the CLI and the parallel
//! simulation grid live in the `weightscape` companion crate.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod conformal;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod kernel;
pub mod linalg;
mod math;
pub mod simulation;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    ForecastPanel, MallowsVariant, MethodSpec, Multipliers, PenaltyFlavor, PerformanceFamily,
    WeightSolution, WeightSpace,
};

pub use nalgebra::{DMatrix, DVector};
