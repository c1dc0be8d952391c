//! Mass localization of probability measures.
//!
//! Given a measure `mu`, a class of closed sets and a level `alpha`, find the
//! smallest set of the class carrying mass at least `1 - alpha`, where "small"
//! is measured by a packing size
//!
//! ```text
//! tau(B) = integral over (0, t_max] of phi(t) * M(B, t) dt
//! ```
//!
//! and `M(B, t)` is the largest number of points of `B` with pairwise
//! distances strictly greater than `t`.
//!
//! Everything is computed exactly at desk scale: finite point sets, 1-D
//! intervals in closed form, and parametric shapes through deterministic
//! probe grids.
//!
//! Module map:
//!
//! - [`metric`]: point sets, distances, neighborhoods, Hausdorff contrast.
//! - [`packing`]: packing/covering numbers and packing profiles.
//! - [`size`]: size functionals and their evaluation.
//! - [`classes`]: set descriptors, membership, mass and candidate enumeration.
//! - [`measures`]: seeded generators, chains and analytic 1-D measures.
//! - [`localize`]: the constrained minimizer and its brute-force oracle.
//! - [`experiments`]: consistency sweeps and the related checks.
//! - [`cli`]: the `masslock` command line.

pub mod classes;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod localize;
pub mod measures;
pub mod metric;
pub mod packing;
pub mod size;

pub use classes::{ClassSpec, Family, SetDescriptor};
pub use error::{Error, Result};
pub use localize::{LocalizationProblem, LocalizationResult};
pub use measures::{Analytic1DMeasure, EmpiricalMeasure, Generator};
pub use metric::{Metric, PointSet};
pub use packing::PackingProfile;
pub use size::{Backend, SizeFunctional, Weight};

/// Absolute tolerance shared by distance, containment and mass comparisons.
pub const TOL: f64 = 1e-12;
