//! The elliptic and L2 projectors of one element, in d.o.f. coordinates.
//!
//! Everything is assembled from two matrices: `D` (the d.o.f. of the scaled
//! monomials) and `B` (the energy pairing of monomials against a virtual
//! function, reduced to d.o.f. by integration by parts). The volume part of
//! `B` only involves cell moments up to degree `k - 2`, so the pack requires
//! `l >= k - 2`; the gradient-orthogonality system `G = B D` is closed by a
//! mean-value constraint in its first row.

use super::trace::edge_trace_matrix;
use super::DofLayout;
use crate::error::{Result, VemError};
use crate::geometry::{PolygonGeometry, VirtualTriangulation};
use crate::poly::{
    integrate_edge, monomial_mass_matrix, poly_dim, spd_condition, MonomialBasis,
};
use nalgebra::{Cholesky, DMatrix, DVector};

/// Condition-number ceiling for the projector system; beyond it the element
/// is reported as numerically unusable instead of silently degrading.
const CONDITION_LIMIT: f64 = 1e12;

/// All element-level projector data for one polygon.
#[derive(Debug, Clone)]
pub struct ProjectorPack {
    layout: DofLayout,
    /// Scaled monomials of degree `k` on this polygon.
    basis: MonomialBasis,
    area: f64,
    /// D.o.f. of the monomials; `n_dofs x dim P_k`.
    pub d: DMatrix<f64>,
    /// Energy pairing rows with the constraint in row 0; `dim P_k x n_dofs`.
    pub b: DMatrix<f64>,
    /// `G = B D`, the constrained gradient Gram matrix.
    pub g: DMatrix<f64>,
    /// `G` with the constraint row zeroed: the monomial stiffness matrix.
    pub g_hat: DMatrix<f64>,
    /// Elliptic projector onto monomial coefficients; `dim P_k x n_dofs`.
    pub pi_star: DMatrix<f64>,
    /// Elliptic projector in d.o.f. coordinates; `n_dofs x n_dofs`.
    pub pi_nabla: DMatrix<f64>,
    /// L2 projector onto monomial coefficients, with moments of degree
    /// above `l` supplied through the elliptic projection.
    pub pi_zero_star: DMatrix<f64>,
    /// Mass matrix of the degree-`k` scaled monomials.
    pub mass: DMatrix<f64>,
    /// The constraint functional (row 0 of `b`): the cell mean for `l >= 0`,
    /// the boundary mean for `l = -1`.
    pub constraint: DVector<f64>,
}

impl ProjectorPack {
    /// Assembles the projectors of one element.
    pub fn build(
        layout: DofLayout,
        geom: &PolygonGeometry,
        tri: &VirtualTriangulation,
    ) -> Result<Self> {
        let k = layout.k();
        let l = layout.l();
        if l < k as i32 - 2 {
            return Err(VemError::UnsupportedLayout(format!(
                "the elliptic projector needs cell moments up to degree k - 2 \
                 (k = {k}, l = {l})"
            )));
        }
        assert_eq!(layout.n_vertices(), geom.vertices.len());
        let basis = MonomialBasis::new(k as i32, geom.centroid, geom.diameter);
        let np = basis.dim();
        let n = layout.n_dofs();
        let mass = monomial_mass_matrix(&basis, tri)?;

        // D: all d.o.f. applied to each monomial. The cell-moment block is
        // the (scaled) leading rows of the mass matrix because the degree-l
        // cell basis is a prefix of the degree-k basis.
        let mut d = DMatrix::zeros(n, np);
        for (i, &v) in geom.vertices.iter().enumerate() {
            for alpha in 0..np {
                d[(layout.vertex_dof(i), alpha)] = basis.value(alpha, v);
            }
        }
        let edge_points = k + 2;
        for e in 0..layout.n_vertices() {
            let frame = layout.edge_frame(geom, e);
            for j in 0..layout.moments_per_edge() {
                for alpha in 0..np {
                    let val = integrate_edge(frame.p0, frame.p1, edge_points, |p, s| {
                        basis.value(alpha, p) * frame.xi(s).powi(j as i32)
                    });
                    d[(layout.edge_moment_dof(e, j), alpha)] = val / frame.length;
                }
            }
        }
        for beta in 0..layout.n_cell_dofs() {
            for alpha in 0..np {
                d[(layout.cell_moment_dof(beta), alpha)] = mass[(beta, alpha)] / geom.area;
            }
        }

        // B: row alpha applied to a d.o.f. vector of v equals
        // (grad m_alpha, grad v) = -(lap m_alpha, v) + <v, n . grad m_alpha>.
        // The volume term reads off cell moments; the boundary term goes
        // through the polynomial edge trace.
        let trace = edge_trace_matrix(k);
        let mut b = DMatrix::zeros(np, n);
        for alpha in 1..np {
            for (beta, c) in basis.laplacian_coefficients(alpha) {
                b[(alpha, layout.cell_moment_dof(beta))] -= c * geom.area;
            }
            for e in 0..layout.n_vertices() {
                let frame = layout.edge_frame(geom, e);
                let mut w = vec![0.0; k + 1];
                for (r, w_r) in w.iter_mut().enumerate() {
                    *w_r = integrate_edge(frame.p0, frame.p1, edge_points, |p, s| {
                        let g = basis.gradient(alpha, p);
                        (g[0] * frame.normal[0] + g[1] * frame.normal[1])
                            * frame.xi(s).powi(r as i32)
                    });
                }
                for (q, dof) in frame.trace_dofs().enumerate() {
                    b[(alpha, dof)] += (0..=k).map(|r| trace[(r, q)] * w[r]).sum::<f64>();
                }
            }
        }

        // Constraint row: fix the projection of the gradient-free mode by
        // matching the cell mean (or, without cell moments, the boundary
        // mean recovered from the edge traces).
        let mut constraint = DVector::zeros(n);
        if l >= 0 {
            constraint[layout.cell_moment_dof(0)] = 1.0;
        } else {
            for e in 0..layout.n_vertices() {
                let frame = layout.edge_frame(geom, e);
                for (q, dof) in frame.trace_dofs().enumerate() {
                    let row_sum: f64 = (0..=k)
                        .map(|r| trace[(r, q)] * centered_power_integral(r))
                        .sum();
                    constraint[dof] += frame.length * row_sum / geom.perimeter;
                }
            }
        }
        b.row_mut(0).copy_from(&constraint.transpose());

        let g = &b * &d;
        let cond = spd_condition(&g);
        if !cond.is_finite() || cond > CONDITION_LIMIT {
            return Err(VemError::IllConditioned { cond });
        }
        let mut g_hat = g.clone();
        g_hat.row_mut(0).fill(0.0);

        let pi_star = g
            .clone()
            .full_piv_lu()
            .solve(&b)
            .ok_or(VemError::IllConditioned { cond })?;
        let pi_nabla = &d * &pi_star;

        // L2 projector: moments of degree <= l are d.o.f.; higher moments
        // are replaced by moments of the elliptic projection.
        let dim_l = poly_dim(l);
        let mut rhs = DMatrix::zeros(np, n);
        for alpha in 0..np {
            if alpha < dim_l {
                rhs[(alpha, layout.cell_moment_dof(alpha))] = geom.area;
            } else {
                let row = mass.row(alpha) * &pi_star;
                rhs.row_mut(alpha).copy_from(&row);
            }
        }
        let mass_cond = spd_condition(&mass);
        if !mass_cond.is_finite() || mass_cond > 1e14 {
            return Err(VemError::SingularMass { cond: mass_cond });
        }
        let pi_zero_star = Cholesky::new(mass.clone())
            .ok_or(VemError::SingularMass { cond: mass_cond })?
            .solve(&rhs);

        let pack = ProjectorPack {
            layout,
            basis,
            area: geom.area,
            d,
            b,
            g,
            g_hat,
            pi_star,
            pi_nabla,
            pi_zero_star,
            mass,
            constraint,
        };
        debug_assert!(
            pack.projection_consistency_error() < 1e-10,
            "projector does not reproduce polynomials: residual {}",
            pack.projection_consistency_error()
        );
        Ok(pack)
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    /// The degree-`k` scaled monomial basis the projectors map into.
    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.n_dofs()
    }

    /// Dimension of the polynomial target space.
    pub fn n_poly(&self) -> usize {
        self.basis.dim()
    }

    /// Largest entry of `PiStar D - I`: both projectors must leave
    /// polynomials fixed, so this is a machine-precision-level residual on
    /// any usable element.
    pub fn projection_consistency_error(&self) -> f64 {
        let np = self.n_poly();
        let r1 = &self.pi_star * &self.d - DMatrix::<f64>::identity(np, np);
        let r2 = &self.pi_zero_star * &self.d - DMatrix::<f64>::identity(np, np);
        r1.amax().max(r2.amax())
    }
}

/// Integral of `xi^p` over [-1/2, 1/2].
fn centered_power_integral(p: usize) -> f64 {
    if p % 2 == 1 {
        0.0
    } else {
        (0.5f64).powi(p as i32) / (p as f64 + 1.0)
    }
}
