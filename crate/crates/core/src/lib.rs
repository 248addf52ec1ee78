//! Vertex flow and cut sparsifiers, 0-extensions, 0-decompositions, and
//! hypercube lower-bound experiments.

// Dense matrices and tableaux read more clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod contraction;
pub mod cube;
pub mod error;
pub mod flow;
pub mod flows;
pub mod frt;
pub mod gap;
pub mod graph;
pub mod io;
pub mod lifted;
pub mod lp;
pub mod metric;
pub mod packing;
pub mod sparsifier;

pub use error::{Error, Result};

/// Tolerance for primal feasibility checks.
pub const FEAS_TOL: f64 = 1e-7;
/// Tolerance for optimal values and duality gaps.
pub const OPT_TOL: f64 = 1e-6;
/// Tolerance for quantities that are exact up to rounding.
pub const EXACT_TOL: f64 = 1e-9;
