//! The five comparison interpolants of a smooth function on one element:
//! its best L2 polynomial, the nodal finite element interpolant, a
//! PDE-matched interpolant, and the members of the two virtual space
//! variants carrying the function's d.o.f.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Result, VemError};
use crate::geometry::{Point, PolygonGeometry, VirtualTriangulation};
use crate::poly::{project_l2_poly, MonomialBasis, DATA_DEGREE};
use crate::vemcore::{evaluate_dofs, DofLayout};

use super::fespace::{FeSpace, NodeKind};
use super::realize::{moment_matrix, realize_vem_basis, RealizedVemSpace, SpaceVariant};
use super::shapes::lagrange_1d;

/// Which interpolant of a smooth function to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolantKind {
    /// L2-orthogonal projection onto degree-`k` polynomials.
    PolyProjection,
    /// Nodal interpolant; boundary nodes take the per-edge degree-`k`
    /// polynomial interpolation of the function, interior nodes its values.
    Nodal,
    /// Same trace as [`Nodal`](Self::Nodal), interior values solving the
    /// local problem whose discrete Laplacian matches the Laplacian of the
    /// polynomial projection.
    PdeMatched,
    /// Member of the plain virtual space carrying the function's d.o.f.
    DofMember,
    /// Member of the constrained variant carrying the same d.o.f.
    DofMemberConstrained,
}

impl InterpolantKind {
    pub const ALL: [InterpolantKind; 5] = [
        InterpolantKind::PolyProjection,
        InterpolantKind::Nodal,
        InterpolantKind::PdeMatched,
        InterpolantKind::DofMember,
        InterpolantKind::DofMemberConstrained,
    ];

    /// Stable identifier used in reports and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            InterpolantKind::PolyProjection => "v_pi",
            InterpolantKind::Nodal => "v_c",
            InterpolantKind::PdeMatched => "v_I",
            InterpolantKind::DofMember => "I_K",
            InterpolantKind::DofMemberConstrained => "I_K_W",
        }
    }
}

/// An interpolant: either polynomial coefficients in the element's scaled
/// monomial basis or nodal values on the finite element space.
#[derive(Debug, Clone)]
pub enum Interpolant {
    Polynomial(DVector<f64>),
    Fe(DVector<f64>),
}

/// Builds all interpolants of one element, reusing the realized spaces and
/// moment data across calls.
pub struct ElementInterpolator<'a> {
    space: &'a FeSpace,
    geom: &'a PolygonGeometry,
    layout: DofLayout,
    plain: RealizedVemSpace,
    constrained: RealizedVemSpace,
    /// Degree-`k` scaled monomials.
    basis: MonomialBasis,
    /// Moments of every nodal basis function against `basis`.
    moments: DMatrix<f64>,
}

impl<'a> ElementInterpolator<'a> {
    pub fn new(space: &'a FeSpace, geom: &'a PolygonGeometry) -> Result<Self> {
        let k = space.k();
        let layout = DofLayout::new(k, k as i32 - 2, geom.vertices.len())?;
        let plain = realize_vem_basis(space, geom, &layout, SpaceVariant::Plain)?;
        let constrained = realize_vem_basis(space, geom, &layout, SpaceVariant::Constrained)?;
        let basis = MonomialBasis::new(k as i32, geom.centroid, geom.diameter);
        let moments = moment_matrix(space, &basis)?;
        Ok(ElementInterpolator {
            space,
            geom,
            layout,
            plain,
            constrained,
            basis,
            moments,
        })
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    pub fn space(&self) -> &FeSpace {
        self.space
    }

    pub fn interpolate(
        &self,
        u: &dyn Fn(Point) -> f64,
        kind: InterpolantKind,
    ) -> Result<Interpolant> {
        match kind {
            InterpolantKind::PolyProjection => {
                Ok(Interpolant::Polynomial(self.poly_projection(u)?))
            }
            InterpolantKind::Nodal => Ok(Interpolant::Fe(self.nodal(u))),
            InterpolantKind::PdeMatched => Ok(Interpolant::Fe(self.pde_matched(u)?)),
            InterpolantKind::DofMember => {
                let chi = evaluate_dofs(&self.layout, self.geom, self.space.base(), u)?;
                Ok(Interpolant::Fe(self.plain.member(&chi)))
            }
            InterpolantKind::DofMemberConstrained => {
                let chi = evaluate_dofs(&self.layout, self.geom, self.space.base(), u)?;
                Ok(Interpolant::Fe(self.constrained.member(&chi)))
            }
        }
    }

    /// L2 and H1-seminorm errors of an interpolant against the function it
    /// was built from.
    pub fn error(
        &self,
        interp: &Interpolant,
        u: &dyn Fn(Point) -> f64,
        grad_u: &dyn Fn(Point) -> [f64; 2],
    ) -> Result<(f64, f64)> {
        match interp {
            Interpolant::Fe(v) => self.space.error_norms(v, u, grad_u),
            Interpolant::Polynomial(c) => {
                let l2 = self.space.integrate(DATA_DEGREE, &|p| {
                    let d = u(p) - self.basis.eval(c, p);
                    d * d
                })?;
                let h1 = self.space.integrate(DATA_DEGREE, &|p| {
                    let gu = grad_u(p);
                    let gp = self.basis.eval_gradient(c, p);
                    let (dx, dy) = (gu[0] - gp[0], gu[1] - gp[1]);
                    dx * dx + dy * dy
                })?;
                Ok((l2.max(0.0).sqrt(), h1.max(0.0).sqrt()))
            }
        }
    }

    fn poly_projection(&self, u: &dyn Fn(Point) -> f64) -> Result<DVector<f64>> {
        project_l2_poly(&self.basis, self.space.base(), u)
    }

    /// Nodal values: interior nodes sample the function; boundary nodes take
    /// the degree-`k` interpolation of the function along their parent
    /// polygon edge, which keeps the trace a single polynomial per edge.
    fn nodal(&self, u: &dyn Fn(Point) -> f64) -> DVector<f64> {
        let k = self.space.k();
        let verts = &self.geom.vertices;
        let n = verts.len();
        let mut v = DVector::zeros(self.space.n_nodes());
        for (node, &kind) in self.space.node_kinds().iter().enumerate() {
            v[node] = match kind {
                NodeKind::Interior | NodeKind::PolygonVertex(_) => u(self.space.nodes()[node]),
                NodeKind::PolygonEdge { e, t } => {
                    let (a, b) = (verts[e], verts[(e + 1) % n]);
                    (0..=k)
                        .map(|q| {
                            let s = q as f64 / k as f64;
                            let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                            u(p) * lagrange_1d(k, q, t)
                        })
                        .sum()
                }
            };
        }
        v
    }

    /// Trace of the nodal interpolant; interior values from the stationarity
    /// condition that ties the discrete Laplacian to the Laplacian of the
    /// polynomial projection.
    fn pde_matched(&self, u: &dyn Fn(Point) -> f64) -> Result<DVector<f64>> {
        let vpi = self.poly_projection(u)?;
        let mut lap = DVector::zeros(self.basis.dim());
        for j in 0..self.basis.dim() {
            for (idx, c) in self.basis.laplacian_coefficients(j) {
                lap[idx] += vpi[j] * c;
            }
        }
        let mut v = self.nodal(u);
        let interior = self.space.interior_nodes();
        if interior.is_empty() {
            return Ok(v);
        }
        let a = self.space.stiffness();
        let load = &self.moments * &lap;
        let a_ii = DMatrix::from_fn(interior.len(), interior.len(), |i, j| {
            a[(interior[i], interior[j])]
        });
        let rhs = DVector::from_fn(interior.len(), |row, _| {
            let node = interior[row];
            let mut s = -load[node];
            for &b in self.space.boundary_nodes() {
                s -= a[(node, b)] * v[b];
            }
            s
        });
        let chol = Cholesky::new(a_ii)
            .ok_or_else(|| VemError::NotSpd("interior gradient block".into()))?;
        let sol = chol.solve(&rhs);
        for (row, &node) in interior.iter().enumerate() {
            v[node] = sol[row];
        }
        Ok(v)
    }
}

/// Convenience one-shot interpolation on a freshly built element at the
/// laboratory default refinement depth of two.
pub fn interpolate(
    u: &dyn Fn(Point) -> f64,
    geom: &PolygonGeometry,
    tri: &VirtualTriangulation,
    k: usize,
    which: InterpolantKind,
) -> Result<Interpolant> {
    let space = FeSpace::build(tri, k, 2)?;
    let ctx = ElementInterpolator::new(&space, geom)?;
    ctx.interpolate(u, which)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_geometry, triangulate_polygon, QualityConfig};

    fn setup(loop_: &[Point], k: usize, r: usize) -> (PolygonGeometry, FeSpace) {
        let geom = polygon_geometry(loop_).unwrap();
        let tri = triangulate_polygon(&geom, &QualityConfig::default()).unwrap();
        let space = FeSpace::build(&tri, k, r).unwrap();
        (geom, space)
    }

    const UNIT_SQUARE: [Point; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

    #[test]
    fn all_interpolants_reproduce_polynomials() {
        let (geom, space) = setup(&UNIT_SQUARE, 2, 2);
        let ctx = ElementInterpolator::new(&space, &geom).unwrap();
        let u = |p: Point| 0.75 * p[0] * p[0] - p[0] * p[1] + 0.5 * p[1] + 0.1;
        let gu = |p: Point| [1.5 * p[0] - p[1], -p[0] + 0.5];
        for kind in InterpolantKind::ALL {
            let interp = ctx.interpolate(&u, kind).unwrap();
            let (l2, h1) = ctx.error(&interp, &u, &gu).unwrap();
            assert!(l2 < 1e-9, "{}: L2 residual {l2}", kind.label());
            assert!(h1 < 1e-9, "{}: H1 residual {h1}", kind.label());
        }
    }

    #[test]
    fn polynomial_projection_is_orthogonal() {
        let (geom, space) = setup(&UNIT_SQUARE, 2, 1);
        let ctx = ElementInterpolator::new(&space, &geom).unwrap();
        let u = |p: Point| (std::f64::consts::PI * p[0]).sin() * (0.7 * p[1]).cos();
        let Interpolant::Polynomial(c) = ctx.interpolate(&u, InterpolantKind::PolyProjection).unwrap()
        else {
            panic!("polynomial kind must return coefficients");
        };
        // The residual must be orthogonal to every degree-2 monomial.
        for beta in 0..ctx.basis.dim() {
            let m = space
                .integrate(DATA_DEGREE, &|p| {
                    (u(p) - ctx.basis.eval(&c, p)) * ctx.basis.value(beta, p)
                })
                .unwrap();
            assert!(m.abs() < 1e-10, "moment {beta}: {m}");
        }
    }

    #[test]
    fn pde_matched_interior_residual_vanishes() {
        let (geom, space) = setup(&UNIT_SQUARE, 2, 1);
        let ctx = ElementInterpolator::new(&space, &geom).unwrap();
        let u = |p: Point| (p[0] + 0.5 * p[1]).exp();
        let v = match ctx.interpolate(&u, InterpolantKind::PdeMatched).unwrap() {
            Interpolant::Fe(v) => v,
            _ => unreachable!(),
        };
        let vpi = ctx.poly_projection(&u).unwrap();
        let mut lap = DVector::zeros(ctx.basis.dim());
        for j in 0..ctx.basis.dim() {
            for (idx, cc) in ctx.basis.laplacian_coefficients(j) {
                lap[idx] += vpi[j] * cc;
            }
        }
        // (grad v, grad phi_i) + (lap, phi_i) = 0 on interior functions.
        let residual = space.stiffness() * &v + &ctx.moments * &lap;
        for &i in space.interior_nodes() {
            assert!(residual[i].abs() < 1e-11, "node {i}: {}", residual[i]);
        }
        // Trace equals the nodal interpolant's trace.
        let nodal = ctx.nodal(&u);
        for &b in space.boundary_nodes() {
            assert_eq!(v[b], nodal[b]);
        }
    }

    #[test]
    fn dof_members_preserve_low_moments() {
        // The plain member keeps the cell moments of the function exactly
        // (they are shared d.o.f.); verify by integrating the member.
        let (geom, space) = setup(&UNIT_SQUARE, 3, 1);
        let ctx = ElementInterpolator::new(&space, &geom).unwrap();
        let u = |p: Point| (1.3 * p[0] - 0.4 * p[1]).sin();
        let v = match ctx.interpolate(&u, InterpolantKind::DofMember).unwrap() {
            Interpolant::Fe(v) => v,
            _ => unreachable!(),
        };
        let basis_l = MonomialBasis::new(1, geom.centroid, geom.diameter);
        let moments = moment_matrix(&space, &basis_l).unwrap();
        let member_moments = moments.tr_mul(&v);
        for beta in 0..basis_l.dim() {
            let exact = space
                .integrate(DATA_DEGREE, &|p| u(p) * basis_l.value(beta, p))
                .unwrap();
            assert!(
                (member_moments[beta] - exact).abs() < 1e-9,
                "moment {beta}: {} vs {exact}",
                member_moments[beta]
            );
        }
    }

    #[test]
    fn nodal_interpolant_trace_is_polynomial_per_edge() {
        // On each edge the trace interpolates the function at k + 1
        // equispaced points, not at every boundary node.
        let (geom, space) = setup(&UNIT_SQUARE, 2, 2);
        let ctx = ElementInterpolator::new(&space, &geom).unwrap();
        let u = |p: Point| (3.0 * p[0]).sin() + p[1];
        let v = ctx.nodal(&u);
        // The bottom edge runs from (0,0) to (1,0); the parent-edge
        // quadratic interpolates u at x = 0, 1/2, 1.
        let q = |x: f64| {
            let (f0, f1, f2) = (u([0.0, 0.0]), u([0.5, 0.0]), u([1.0, 0.0]));
            f0 * (1.0 - x) * (1.0 - 2.0 * x) + 4.0 * f1 * x * (1.0 - x)
                - f2 * x * (1.0 - 2.0 * x)
        };
        for (node, &kind) in space.node_kinds().iter().enumerate() {
            if let NodeKind::PolygonEdge { e: 0, t } = kind {
                assert!(
                    (v[node] - q(t)).abs() < 1e-13,
                    "t = {t}: {} vs {}",
                    v[node],
                    q(t)
                );
            }
        }
    }

    #[test]
    fn one_shot_interpolation_runs_at_default_depth() {
        let geom = polygon_geometry(&UNIT_SQUARE).unwrap();
        let tri = triangulate_polygon(&geom, &QualityConfig::default()).unwrap();
        let u = |p: Point| p[0] + p[1];
        let out = interpolate(&u, &geom, &tri, 1, InterpolantKind::DofMemberConstrained).unwrap();
        let Interpolant::Fe(v) = out else {
            panic!("finite element kind expected")
        };
        // A linear function is reproduced exactly.
        let space = FeSpace::build(&tri, 1, 2).unwrap();
        for (node, &p) in space.nodes().iter().enumerate() {
            assert!((v[node] - (p[0] + p[1])).abs() < 1e-10);
        }
    }
}
