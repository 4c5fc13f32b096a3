//! Concrete finite element realization of the virtual spaces.
//!
//! Virtual element functions are defined by constraints, not formulas, so
//! they cannot be evaluated pointwise from their d.o.f. alone. This module
//! materializes them: a conforming Lagrange space on the element's
//! triangulation whose boundary values are tied to the per-edge trace
//! polynomials, with the moment closure enforced through local saddle
//! systems. The realized functions can be evaluated, integrated, projected,
//! split, and measured — the machinery behind the verification laboratory.

mod fespace;
mod interpolate;
mod realize;
mod shapes;

use crate::error::Result;
use crate::geometry::VirtualTriangulation;
use nalgebra::DVector;

pub use fespace::{FeSpace, NodeKind, SubEdge};
pub use interpolate::{interpolate, ElementInterpolator, Interpolant, InterpolantKind};
pub use realize::{
    harmonic_split, minimal_refinement, moment_matrix, qk_project, realize_vem_basis,
    RealizedVemSpace, SpaceVariant,
};

/// Nodal value vector of one finite element function.
pub type FeFunction = DVector<f64>;

/// Builds the degree-`k` Lagrange space on `tri` red-refined `r` times.
pub fn lagrange_space(tri: &VirtualTriangulation, k: usize, r: usize) -> Result<FeSpace> {
    FeSpace::build(tri, k, r)
}
