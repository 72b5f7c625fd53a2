//! Discrete Stein operators, Stein-equation solvers, Fisher-information type
//! distances and the local Pinsker inequalities that connect them.

pub mod density;
pub mod distances;
pub mod error;
pub mod pinsker;
pub mod random;
pub mod rank;
pub mod scalar;
pub mod spec;
pub mod stein;
pub mod suite;
pub mod support;
pub mod zoo;

pub use density::{build_density, moments, DiscreteDensity, Family, FamilyKind};
pub use distances::{Ext, InfiniteReason, MetricKind};
pub use error::{Error, Result};
pub use pinsker::{BoundCheck, CheckStatus, PoissonFactor, RankExperimentResult};
pub use scalar::{Backend, Rational, Scalar};
pub use spec::{DensitySpec, FamilySpec, Number, TruncationPolicy};
pub use stein::{solve_stein, Direction, SteinSolution, TestFunction};
pub use suite::{run_suite, Grid, SuiteName, SuiteReport};
pub use support::{Bound, Support};
pub use zoo::{ZooKind, ZooOperator};
