//! Steepest-descent globalization of Newton-type line-search methods.
//!
//! When the Newton-type direction fails the angle criterion, the search
//! direction becomes the convex combination
//! `beta * d_nt - (1 - beta) * xi * g`, where `xi` is a safeguarded BB2
//! step length. With `xi` chosen this way the direction is invariant to
//! scaling of the objective.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the experiment
//! harness and the command line live in the `sdg-bench` crate.
//!
//! ```
//! use sdg_core::problems::{self, Objective, ProblemInstance};
//! use sdg_core::sdg::{sdg_run, SolverOptions, Status};
//! use sdg_core::directions::EngineKind;
//!
//! let obj = problems::extended_rosenbrock(2);
//! let inst = ProblemInstance::at_default_start(obj);
//! let opts = SolverOptions { engine: EngineKind::Newton, ..SolverOptions::default() };
//! let rec = sdg_run(&inst, &opts);
//! assert_eq!(rec.status, Status::Converged);
//! ```
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod directions;
pub mod linesearch;
pub mod numerics;
pub mod problems;
pub mod sdg;

pub use numerics::{SymMatrix, Vector};
pub use problems::{Objective, ProblemInstance};
pub use sdg::{plain_run, sdg_run, RunRecord, SolverOptions, Status};

/// Machine epsilon for `f64`.
pub const EPS_MAC: f64 = f64::EPSILON;
