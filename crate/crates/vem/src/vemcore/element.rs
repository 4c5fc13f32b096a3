//! Element stiffness, stabilization, and load vectors.

use super::projector::ProjectorPack;
use crate::error::Result;
use crate::geometry::{Point, VirtualTriangulation};
use crate::poly::{integrate_polygon, DATA_DEGREE};
use nalgebra::{DMatrix, DVector};

/// Which rank-completing term the element stiffness uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizationKind {
    /// `(I - PiNabla)^T (I - PiNabla)`: the plain d.o.f. inner product on
    /// the complement of the elliptic projection.
    DofFull,
    /// `(I - D PiZeroStar)^T R (I - D PiZeroStar)` with `R` selecting the
    /// boundary d.o.f.: the boundary-d.o.f. inner product on the complement
    /// of the L2 projection.
    DofBoundary,
}

/// How the element load vector discretizes `(f, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    /// `(f, PiNabla v)`: pairs the data with the elliptic projection.
    PiNabla,
    /// `(f, PiZero v)`: pairs the data with the L2 projection.
    Moments,
}

/// The rank-completing stabilization matrix. Both variants vanish on
/// polynomial d.o.f. vectors and are scale-free (no size weight).
pub fn stabilization(pack: &ProjectorPack, kind: StabilizationKind) -> DMatrix<f64> {
    let n = pack.n_dofs();
    let eye = DMatrix::<f64>::identity(n, n);
    match kind {
        StabilizationKind::DofFull => {
            let q = &eye - &pack.pi_nabla;
            q.transpose() * &q
        }
        StabilizationKind::DofBoundary => {
            let q = &eye - &pack.d * &pack.pi_zero_star;
            let n_boundary = pack.layout().n_vertices() * pack.layout().k();
            // R q keeps only the boundary-d.o.f. rows of q.
            let mut rq = q.clone();
            rq.rows_mut(n_boundary, n - n_boundary).fill(0.0);
            q.transpose() * rq
        }
    }
}

/// Element stiffness: exact energy of the elliptic projection plus the
/// chosen stabilization on its complement.
pub fn element_stiffness(pack: &ProjectorPack, kind: StabilizationKind) -> DMatrix<f64> {
    pack.pi_star.transpose() * &pack.g_hat * &pack.pi_star + stabilization(pack, kind)
}

/// Element load vector: moments of `f` against the scaled monomials, pulled
/// back through the selected projector.
pub fn element_load(
    pack: &ProjectorPack,
    tri: &VirtualTriangulation,
    f: impl Fn(Point) -> f64,
    kind: LoadKind,
) -> Result<DVector<f64>> {
    let np = pack.n_poly();
    let mut moments = DVector::zeros(np);
    for alpha in 0..np {
        moments[alpha] =
            integrate_polygon(tri, DATA_DEGREE, |p| pack.basis().value(alpha, p) * f(p))?;
    }
    let projector = match kind {
        LoadKind::PiNabla => &pack.pi_star,
        LoadKind::Moments => &pack.pi_zero_star,
    };
    Ok(projector.transpose() * moments)
}
