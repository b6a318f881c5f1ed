//! Zig-Zag samplers for one-dimensional diffusion bridges.
//!
//! Bridge paths are expanded in a truncated Faber-Schauder basis and the
//! coefficient vector is sampled with piecewise-deterministic Zig-Zag
//! dynamics. The crate provides the basis and its dependency graph, exact
//! Poisson first-event inversion, the standard, subsampled, local and fully
//! local samplers, drift models with their rates and bounds, and diagnostics
//! for checking sampler output.

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod models;
pub mod poisson;
pub mod samplers;

pub use basis::{BasisContext, DependencyGraph, DyadicIndex};
pub use error::{Error, Result};
pub use poisson::{AffineRate, ExpRate, RateComponent, RateSpec};
