//! Conforming virtual element method (VEM) for the 2D Poisson problem on
//! polygonal meshes, together with a small numerical laboratory that measures
//! the constants and convergence orders the method's analysis relies on.
//!
//! Module map:
//!
//! * [`geometry`] — polygonal meshes, per-cell geometry, auxiliary
//!   triangulations of single cells, built-in mesh families, JSON I/O.
//! * [`poly`] — scaled monomial bases, triangle/edge quadrature, polynomial
//!   L2 projection, bivariate polynomials.
//! * [`vemcore`] — degrees of freedom, the elliptic and L2 projectors in
//!   d.o.f. coordinates, stabilization, element matrices.
//! * [`realization`] — computable finite element twins of the virtual spaces
//!   on a refined cell triangulation, plus the interpolation operators.
//! * [`solver`] — global assembly, Dirichlet elimination, preconditioned CG,
//!   error norms.
//! * [`lab`] — eigenvalue-based constant estimates, convergence and
//!   interpolation studies, patch test, CSV reports.

pub mod error;
pub mod geometry;
pub mod lab;
pub mod poly;
pub mod realization;
pub mod solver;
pub mod vemcore;

pub use error::{Result, VemError};
