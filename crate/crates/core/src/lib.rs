//! Computational convex analysis over V-representation polytopes.
//!
//! The crate turns a chain of classical existence results into executable,
//! certificate-producing operations:
//!
//! - [`separation`]: strict separation of a point or a compact polytope from a
//!   polytope, with the margin identity `⟨u,x⟩ − ⟨u,y⟩ = ‖u‖²` as certificate.
//! - [`intersection`]: Ghouila-Houri/Klee intersection checks for finite
//!   families, returning a common point or a union-convexity counter-witness.
//! - [`kkm`]: finite KKM maps, their guaranteed intersection points, and
//!   partition-of-unity selections.
//! - [`alternatives`]: Ky Fan style alternatives, the two-function
//!   alternative and minimax saddle points.
//! - [`vi`]: Stampacchia variational inequalities and quasiconvex
//!   minimization.
//! - [`fixed_points`]: fixed points of affine self-maps and common fixed
//!   points of commuting families.
//!
//! Every operation is a pure function of its inputs.

pub mod alternatives;
pub mod error;
pub mod fixed_points;
pub mod geometry;
pub mod intersection;
pub mod kkm;
pub mod lp;
pub mod separation;
pub mod vi;

pub use error::GeometryError;
pub use geometry::{
    contains, linear_maximize, minkowski_difference, project, BarycentricCoords, Hyperplane, Polytope, Projection,
    Vector, DEFAULT_TOL,
};
