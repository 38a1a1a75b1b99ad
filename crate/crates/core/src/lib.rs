//! Optimal heating of the air under a glass dome.
//!
//! The 2D cross-section of the dome is a half-disc: the pool forms the floor,
//! heaters sit on the glass just above it. Given a desired air temperature at
//! a final time, the crate finds the heater temperatures (box-constrained
//! boundary control) by a projected gradient method whose gradient comes from
//! an adjoint heat equation solved backward in time. Space is discretised with
//! linear triangles, time with implicit Euler.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod config;
pub mod error;
pub mod heat;
pub mod linalg;
pub mod mesh;
pub mod optimizer;
pub mod output;
pub mod par;
pub mod sweep;
pub mod vtk;

pub use assembly::{DofPartition, FemMatrices};
pub use error::{Error, Result};
pub use heat::{ControlTrajectory, HeatProblem, ProblemConfig, StateTrajectory, TimeGrid};
pub use linalg::SparseMatrix;
pub use mesh::{BoundaryTag, Point2, TriMesh};
pub use optimizer::{GradientScheme, OptimOptions, OptimReport, StopReason};
