//! Realization of virtual element functions as Lagrange finite element
//! functions on the refined triangulation.
//!
//! A member is pinned down by its boundary trace (a piecewise polynomial
//! determined by the vertex and edge d.o.f.) together with moment
//! constraints in the interior, enforced through a Lagrange multiplier:
//! among all finite element functions with that trace and those moments,
//! the realized one makes the gradient form stationary. Solving the saddle
//! system once per d.o.f. yields a nodal basis matrix whose columns realize
//! the canonical d.o.f. basis.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Result, VemError};
use crate::geometry::{PolygonGeometry, VirtualTriangulation};
use crate::poly::{poly_dim, triangle_rule, MonomialBasis};
use crate::vemcore::{DofLayout, DofVector, ProjectorPack};

use super::fespace::FeSpace;

/// Which interior moment closure the realized space uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceVariant {
    /// Moments up to the layout's cell order are prescribed by the d.o.f.
    Plain,
    /// The layout's cell moments are prescribed and the remaining moments up
    /// to degree `k` are tied to the gradient projection of the d.o.f.;
    /// requires the `(k, k - 2)` layout.
    Constrained,
}

/// A basis of virtual element functions materialized as finite element
/// nodal vectors.
#[derive(Debug, Clone)]
pub struct RealizedVemSpace {
    layout: DofLayout,
    variant: SpaceVariant,
    /// `n_nodes x n_dofs`; column `j` realizes the `j`-th canonical d.o.f.
    phi: DMatrix<f64>,
    unisolvence_error: f64,
}

impl RealizedVemSpace {
    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    pub fn variant(&self) -> SpaceVariant {
        self.variant
    }

    /// Nodal values of the realized basis, one column per d.o.f.
    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// Largest deviation of the re-evaluated d.o.f. of the realized basis
    /// from the identity.
    pub fn unisolvence_error(&self) -> f64 {
        self.unisolvence_error
    }

    /// Nodal values of the member with the given d.o.f.
    pub fn member(&self, dofs: &DofVector) -> DVector<f64> {
        &self.phi * dofs
    }

    /// Stiffness and mass forms of the space, expressed on the d.o.f.: the
    /// pullbacks `Phi^T A Phi` and `Phi^T M Phi` of the finite element
    /// forms.
    pub fn energy_forms(&self, space: &FeSpace) -> (DMatrix<f64>, DMatrix<f64>) {
        assert_eq!(space.n_nodes(), self.phi.nrows());
        let a = space.stiffness() * &self.phi;
        let m = space.mass() * &self.phi;
        (self.phi.tr_mul(&a), self.phi.tr_mul(&m))
    }
}

/// Matrix of moments `(phi_node, m_beta)` of every nodal basis function
/// against the given monomials; `n_nodes x dim`.
pub fn moment_matrix(space: &FeSpace, basis: &MonomialBasis) -> Result<DMatrix<f64>> {
    use super::shapes::{local_multi_indices, shape_value};
    let degree = (space.k() as i32 + basis.degree()).max(1) as usize;
    let rule = triangle_rule(degree)?;
    let multis = local_multi_indices(space.k());
    let mut c = DMatrix::zeros(space.n_nodes(), basis.dim());
    for t in 0..space.n_triangles() {
        let [pa, pb, pc] = space.triangle_vertices(t);
        let two_area = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
        for (&lam, &w) in rule.points.iter().zip(rule.weights.iter()) {
            let p = [
                lam[0] * pa[0] + lam[1] * pb[0] + lam[2] * pc[0],
                lam[0] * pa[1] + lam[1] * pb[1] + lam[2] * pc[1],
            ];
            let wt = w * two_area;
            for (slot, &mi) in multis.iter().enumerate() {
                let val = shape_value(mi, space.k(), lam);
                let node = space.triangle_node(t, slot);
                for beta in 0..basis.dim() {
                    c[(node, beta)] += wt * val * basis.value(beta, p);
                }
            }
        }
    }
    Ok(c)
}

/// Smallest refinement depth in `0..=3` at which the degree-`k` space on
/// `tri` has at least `n_constraints` interior nodes. Counting is purely
/// combinatorial (mesh Euler relations), so no space is actually built.
pub fn minimal_refinement(
    tri: &VirtualTriangulation,
    k: usize,
    n_constraints: usize,
) -> Result<usize> {
    let mut edges = std::collections::HashSet::new();
    for &[a, b, c] in &tri.triangles {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let n_poly = tri.n_polygon_vertices;
    let (mut v, mut e, mut t) = (
        tri.points.len() as i64,
        edges.len() as i64,
        tri.triangles.len() as i64,
    );
    let cell_nodes = ((k - 1) * k.saturating_sub(2) / 2) as i64;
    for r in 0..=3usize {
        let n_nodes = v + e * (k as i64 - 1) + t * cell_nodes;
        let n_boundary = (n_poly * k) as i64 * (1 << r);
        if n_nodes - n_boundary >= n_constraints as i64 {
            return Ok(r);
        }
        let e_next = 2 * e + 3 * t;
        v += e;
        e = e_next;
        t *= 4;
    }
    Err(VemError::SaddleSingular(format!(
        "no refinement depth up to 3 provides {n_constraints} interior nodes \
         for degree {k} on this polygon"
    )))
}

/// Realizes the canonical d.o.f. basis of the virtual space with the given
/// layout as finite element functions on `space`.
///
/// Each basis column solves: boundary nodal values from the polynomial edge
/// traces, interior values from the stationarity of the gradient form under
/// the moment constraints. A singular constraint block means the d.o.f. are
/// not unisolvent on this space (too few interior nodes, typically cured by
/// refining), reported as [`VemError::SaddleSingular`]. The result is
/// post-verified by independently re-evaluating all d.o.f.
pub fn realize_vem_basis(
    space: &FeSpace,
    geom: &PolygonGeometry,
    layout: &DofLayout,
    variant: SpaceVariant,
) -> Result<RealizedVemSpace> {
    if layout.k() != space.k() {
        return Err(VemError::UnsupportedLayout(format!(
            "layout degree {} does not match the finite element degree {}",
            layout.k(),
            space.k()
        )));
    }
    if variant == SpaceVariant::Constrained && layout.l() != layout.k() as i32 - 2 {
        return Err(VemError::UnsupportedLayout(format!(
            "the constrained space shares the (k, k - 2) layout, got l = {}",
            layout.l()
        )));
    }
    let n = layout.n_dofs();
    let mult_degree = match variant {
        SpaceVariant::Plain => layout.l(),
        SpaceVariant::Constrained => layout.k() as i32,
    };
    let n_mult = poly_dim(mult_degree);
    let interior = space.interior_nodes();
    let boundary = space.boundary_nodes();
    if interior.len() < n_mult {
        return Err(VemError::SaddleSingular(format!(
            "{} interior nodes cannot carry {} moment constraints; refine \
             the triangulation",
            interior.len(),
            n_mult
        )));
    }

    // Boundary values of every d.o.f. basis column.
    let e_mat = space.boundary_value_matrix(layout, geom);

    // Moment constraint targets per column: low moments are the cell d.o.f.
    // themselves (scaled by |K|), higher ones follow the gradient
    // projection of the column.
    let mut targets = DMatrix::zeros(n_mult, n);
    let n_low = match variant {
        SpaceVariant::Plain => n_mult,
        SpaceVariant::Constrained => poly_dim(layout.k() as i32 - 2),
    };
    for beta in 0..n_low {
        targets[(beta, layout.cell_moment_dof(beta))] = geom.area;
    }
    if variant == SpaceVariant::Constrained && n_mult > n_low {
        let pack = ProjectorPack::build(layout.clone(), geom, space.base())?;
        let projected_moments = &pack.mass * &pack.pi_star;
        for beta in n_low..n_mult {
            for j in 0..n {
                targets[(beta, j)] = projected_moments[(beta, j)];
            }
        }
    }

    let basis = MonomialBasis::new(mult_degree, geom.centroid, geom.diameter);
    let c_full = if n_mult > 0 {
        moment_matrix(space, &basis)?
    } else {
        DMatrix::zeros(space.n_nodes(), 0)
    };

    let a = space.stiffness();
    let a_ii = gather(a, interior, interior);
    let a_ib = gather(a, interior, boundary);
    let mut c_i = gather_rows(&c_full, interior);
    let c_b = gather_rows(&c_full, boundary);

    // Right-hand sides for every column at once.
    let r1 = -&a_ib * &e_mat;
    let mut r2 = &targets - c_b.tr_mul(&e_mat);

    // Equilibrate the constraint columns. On anisotropic cells the
    // high-degree moment columns are orders of magnitude smaller than the
    // low ones (the scaled monomials barely vary across the short axis),
    // and the Schur complement squares that imbalance. Rescaling each
    // constraint and its target together changes only the (discarded)
    // multiplier values, not the solution.
    for beta in 0..n_mult {
        let norm = c_i.column(beta).norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            c_i.column_mut(beta).scale_mut(inv);
            r2.row_mut(beta).scale_mut(inv);
        }
    }

    let u_i = if interior.is_empty() {
        DMatrix::zeros(0, n)
    } else if n_mult == 0 {
        let chol = Cholesky::new(a_ii).ok_or_else(|| {
            VemError::SaddleSingular("interior gradient form is not positive definite".into())
        })?;
        chol.solve(&r1)
    } else {
        let chol = Cholesky::new(a_ii.clone()).ok_or_else(|| {
            VemError::SaddleSingular("interior gradient form is not positive definite".into())
        })?;
        let x = chol.solve(&c_i);
        let schur = c_i.tr_mul(&x);
        let chol_s = Cholesky::new(schur).ok_or_else(|| {
            VemError::SaddleSingular(format!(
                "moment constraints are rank deficient on {} interior nodes \
                 ({} constraints)",
                interior.len(),
                n_mult
            ))
        })?;
        let solve_pair = |rhs1: &DMatrix<f64>, rhs2: &DMatrix<f64>| {
            let y = chol.solve(rhs1);
            let mult = chol_s.solve(&(c_i.tr_mul(&y) - rhs2));
            let u = y - &x * &mult;
            (u, mult)
        };
        let (mut u, mut mult) = solve_pair(&r1, &r2);
        // Two rounds of iterative refinement with the already-computed
        // factors. On stretched cells the Schur complement is poorly
        // conditioned even after equilibration and the first solve leaves
        // a visible constraint residual; re-solving for the defect wins
        // those digits back at the cost of a few matrix products.
        for _ in 0..2 {
            let rho1 = &r1 - &a_ii * &u - &c_i * &mult;
            let rho2 = &r2 - c_i.tr_mul(&u);
            let (du, dmult) = solve_pair(&rho1, &rho2);
            u += du;
            mult += dmult;
        }
        u
    };

    let mut phi = DMatrix::zeros(space.n_nodes(), n);
    for (row, &node) in boundary.iter().enumerate() {
        for j in 0..n {
            phi[(node, j)] = e_mat[(row, j)];
        }
    }
    for (row, &node) in interior.iter().enumerate() {
        for j in 0..n {
            phi[(node, j)] = u_i[(row, j)];
        }
    }

    // Honest post-check: re-evaluate every d.o.f. of every column.
    let mut unisolvence_error: f64 = 0.0;
    for j in 0..n {
        let column = phi.column(j).into_owned();
        let dofs = space.evaluate_dofs(layout, geom, &column)?;
        for i in 0..n {
            let expect = if i == j { 1.0 } else { 0.0 };
            unisolvence_error = unisolvence_error.max((dofs[i] - expect).abs());
        }
    }
    if unisolvence_error > 1e-9 {
        return Err(VemError::SaddleSingular(format!(
            "realized basis fails d.o.f. identity by {unisolvence_error:.3e}"
        )));
    }

    Ok(RealizedVemSpace {
        layout: layout.clone(),
        variant,
        phi,
        unisolvence_error,
    })
}

/// Keeps the boundary nodal values and replaces the interior ones by the
/// L2-orthogonal representative: the output `q` satisfies
/// `(q, phi_i) = (v, phi_i)` for every interior basis function.
pub fn qk_project(space: &FeSpace, v: &DVector<f64>) -> Result<DVector<f64>> {
    let interior = space.interior_nodes();
    let mut out = v.clone();
    if interior.is_empty() {
        return Ok(out);
    }
    let m = space.mass();
    let rhs_full = m * v;
    let m_ii = gather(m, interior, interior);
    let mut rhs = DVector::zeros(interior.len());
    for (row, &node) in interior.iter().enumerate() {
        let mut boundary_part = 0.0;
        for &b in space.boundary_nodes() {
            boundary_part += m[(node, b)] * v[b];
        }
        rhs[row] = rhs_full[node] - boundary_part;
    }
    let chol = Cholesky::new(m_ii)
        .ok_or_else(|| VemError::NotSpd("interior mass block".into()))?;
    let q_i = chol.solve(&rhs);
    for (row, &node) in interior.iter().enumerate() {
        out[node] = q_i[row];
    }
    Ok(out)
}

/// Splits nodal values `v` into a discretely harmonic part with the same
/// boundary trace and a zero-trace remainder; the two are orthogonal in the
/// gradient form.
pub fn harmonic_split(
    space: &FeSpace,
    v: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let interior = space.interior_nodes();
    let a = space.stiffness();
    let mut v0 = DVector::zeros(v.len());
    if !interior.is_empty() {
        let rhs_full = a * v;
        let a_ii = gather(a, interior, interior);
        let rhs = DVector::from_fn(interior.len(), |row, _| rhs_full[interior[row]]);
        let chol = Cholesky::new(a_ii)
            .ok_or_else(|| VemError::NotSpd("interior gradient block".into()))?;
        let v0_i = chol.solve(&rhs);
        for (row, &node) in interior.iter().enumerate() {
            v0[node] = v0_i[row];
        }
    }
    let vh = v - &v0;
    Ok((vh, v0))
}

fn gather(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn gather_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_geometry, triangulate_polygon, Point, QualityConfig};
    use crate::vemcore::evaluate_dofs;

    fn setup(
        loop_: &[Point],
        k: usize,
        l: i32,
        r: usize,
    ) -> (PolygonGeometry, FeSpace, DofLayout) {
        let geom = polygon_geometry(loop_).unwrap();
        let tri = triangulate_polygon(&geom, &QualityConfig::default()).unwrap();
        let space = FeSpace::build(&tri, k, r).unwrap();
        let layout = DofLayout::new(k, l, geom.vertices.len()).unwrap();
        (geom, space, layout)
    }

    const UNIT_SQUARE: [Point; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

    #[test]
    fn linear_triangle_basis_is_the_hat_basis() {
        let (geom, space, layout) = setup(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 1, -1, 0);
        let realized = realize_vem_basis(&space, &geom, &layout, SpaceVariant::Plain).unwrap();
        let phi = realized.basis_matrix();
        assert_eq!(phi.nrows(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((phi[(i, j)] - expect).abs() < 1e-12);
            }
        }
        assert!(realized.unisolvence_error() < 1e-12);
    }

    #[test]
    fn polynomial_members_are_reproduced() {
        // Degree-k polynomials belong to every variant of the space, so the
        // member built from their d.o.f. must match them at every node.
        let (geom, space, layout) = setup(&UNIT_SQUARE, 2, 0, 1);
        let tri = space.base().clone();
        let u = |p: Point| p[0] * p[0] - 0.5 * p[0] * p[1] + p[1] - 0.25;
        let chi = evaluate_dofs(&layout, &geom, &tri, u).unwrap();
        for variant in [SpaceVariant::Plain, SpaceVariant::Constrained] {
            let realized = realize_vem_basis(&space, &geom, &layout, variant).unwrap();
            let member = realized.member(&chi);
            for (node, &p) in space.nodes().iter().enumerate() {
                assert!(
                    (member[node] - u(p)).abs() < 1e-10,
                    "{variant:?} node {node}: {} vs {}",
                    member[node],
                    u(p)
                );
            }
        }
    }

    #[test]
    fn capacity_shortfall_is_reported() {
        // One interior node cannot carry the six moment constraints of the
        // (2, 2) layout; the saddle must refuse rather than fabricate.
        let (geom, space, layout) = setup(&UNIT_SQUARE, 2, 2, 0);
        let err = realize_vem_basis(&space, &geom, &layout, SpaceVariant::Plain).unwrap_err();
        assert!(matches!(err, VemError::SaddleSingular(_)), "{err}");
    }

    #[test]
    fn minimal_refinement_matches_built_capacity() {
        let geom = polygon_geometry(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let tri = triangulate_polygon(&geom, &QualityConfig::default()).unwrap();
        // Combinatorial counting agrees with actually built spaces.
        for k in 1..=4usize {
            for r in 0..=3usize {
                let space = FeSpace::build(&tri, k, r).unwrap();
                let cap = space.interior_capacity();
                if cap > 0 {
                    assert!(minimal_refinement(&tri, k, cap).unwrap() <= r);
                }
                let need = cap + 1;
                let found = minimal_refinement(&tri, k, need);
                if let Ok(r_min) = found {
                    assert!(
                        r_min > r || FeSpace::build(&tri, k, r_min).unwrap().interior_capacity() >= need
                    );
                }
            }
        }
        // The linear space on a bare triangle first gains interior nodes
        // (three of them) at depth two.
        assert_eq!(minimal_refinement(&tri, 1, 3).unwrap(), 2);
        assert_eq!(minimal_refinement(&tri, 1, 1).unwrap(), 2);
    }

    #[test]
    fn constrained_moments_follow_the_gradient_projection() {
        // On the constrained space the full degree-k moments of a member are
        // recoverable from its d.o.f. alone; verify against direct
        // integration of the realized function, and check that the plain
        // space genuinely lacks this property.
        let (geom, space, layout) = setup(&UNIT_SQUARE, 2, 0, 1);
        let tri = space.base().clone();
        let pack = ProjectorPack::build(layout.clone(), &geom, &tri).unwrap();
        let basis_k = MonomialBasis::new(2, geom.centroid, geom.diameter);
        let moments = moment_matrix(&space, &basis_k).unwrap();
        let mass_chol = Cholesky::new(pack.mass.clone()).unwrap();
        let dof = 0usize; // a vertex d.o.f.; its member is not a polynomial
        let mut worst_constrained: f64 = 0.0;
        let mut worst_plain: f64 = 0.0;
        for variant in [SpaceVariant::Constrained, SpaceVariant::Plain] {
            let realized = realize_vem_basis(&space, &geom, &layout, variant).unwrap();
            let w = realized.basis_matrix().column(dof).into_owned();
            // True L2 projection onto degree-2 polynomials.
            let true_coeffs = mass_chol.solve(&moments.tr_mul(&w));
            // Projection reconstructed from the d.o.f. alone.
            let chi = space.evaluate_dofs(&layout, &geom, &w).unwrap();
            let dof_coeffs = &pack.pi_zero_star * &chi;
            let gap = (&true_coeffs - &dof_coeffs).amax();
            match variant {
                SpaceVariant::Constrained => worst_constrained = gap,
                SpaceVariant::Plain => worst_plain = gap,
            }
        }
        assert!(
            worst_constrained < 1e-9,
            "constrained space: moment reconstruction gap {worst_constrained}"
        );
        assert!(
            worst_plain > 1e-6,
            "plain space unexpectedly satisfies the moment tie ({worst_plain}); \
             the check has lost its teeth"
        );
    }

    #[test]
    fn projection_keeps_boundary_and_interior_moments() {
        let (_geom, space, _) = setup(&UNIT_SQUARE, 2, 0, 1);
        let n = space.n_nodes();
        let v = DVector::from_fn(n, |i, _| ((i * 7919 % 13) as f64) / 13.0 - 0.4);
        let q = qk_project(&space, &v).unwrap();
        for &b in space.boundary_nodes() {
            assert_eq!(q[b], v[b]);
        }
        // (q - v, phi_i) = 0 for interior i.
        let residual = space.mass() * (&q - &v);
        for &i in space.interior_nodes() {
            assert!(residual[i].abs() < 1e-12);
        }
        // Members are fixed points.
        let q2 = qk_project(&space, &q).unwrap();
        assert!((&q2 - &q).amax() < 1e-12);
    }

    #[test]
    fn harmonic_split_is_orthogonal() {
        let (_, space, _) = setup(&UNIT_SQUARE, 2, 0, 2);
        let n = space.n_nodes();
        let v = DVector::from_fn(n, |i, _| ((i * 104729 % 17) as f64) / 17.0);
        let (vh, v0) = harmonic_split(&space, &v).unwrap();
        assert!(((&vh + &v0) - &v).amax() < 1e-12);
        for &b in space.boundary_nodes() {
            assert!(v0[b] == 0.0);
        }
        let a = space.stiffness();
        let cross = (a * &vh).dot(&v0);
        let (eh, e0, ev) = ((a * &vh).dot(&vh), (a * &v0).dot(&v0), (a * &v).dot(&v));
        assert!(cross.abs() < 1e-9 * ev.max(1.0), "cross energy {cross}");
        assert!(
            ((eh + e0) - ev).abs() < 1e-9 * ev.max(1.0),
            "energies do not add: {eh} + {e0} vs {ev}"
        );
    }

    #[test]
    fn realization_is_dilation_invariant() {
        // All d.o.f. are dimensionless, so scaling the polygon leaves the
        // nodal basis matrix unchanged.
        let pentagon: Vec<Point> = (0..5)
            .map(|i| {
                let ang = std::f64::consts::PI / 2.0
                    + 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                [ang.cos(), ang.sin()]
            })
            .collect();
        let scaled: Vec<Point> = pentagon.iter().map(|p| [10.0 * p[0], 10.0 * p[1]]).collect();
        let mut results = Vec::new();
        for loop_ in [&pentagon, &scaled] {
            let (geom, space, layout) = setup(loop_, 3, 1, 1);
            let realized =
                realize_vem_basis(&space, &geom, &layout, SpaceVariant::Plain).unwrap();
            results.push(realized.basis_matrix().clone());
        }
        let diff = (&results[0] - &results[1]).amax();
        assert!(diff < 1e-9, "nodal basis changed under dilation: {diff}");
    }

    #[test]
    fn pde_consistent_interpolation_ground_truth() {
        // Realizing from the exact d.o.f. of a harmonic function at k = 1,
        // l = -1 reproduces the discrete harmonic extension of its trace:
        // the split has no zero-trace remainder.
        let (geom, space, layout) = setup(&UNIT_SQUARE, 1, -1, 2);
        let tri = space.base().clone();
        let u = |p: Point| p[0] * p[0] - p[1] * p[1];
        let chi = evaluate_dofs(&layout, &geom, &tri, u).unwrap();
        let realized = realize_vem_basis(&space, &geom, &layout, SpaceVariant::Plain).unwrap();
        let member = realized.member(&chi);
        let (_, v0) = harmonic_split(&space, &member).unwrap();
        let (l2, _) = space.norms(&v0);
        assert!(l2 < 1e-12, "member of the l = -1 space is discretely harmonic");
    }

    #[test]
    fn plain_space_matches_direct_l2_projection_of_low_moments() {
        // The low moments the plain space prescribes are honest L2 data:
        // rebuild the projection of a member onto P_l from scratch.
        let (geom, space, layout) = setup(&UNIT_SQUARE, 3, 1, 1);
        let realized = realize_vem_basis(&space, &geom, &layout, SpaceVariant::Plain).unwrap();
        let w = realized.basis_matrix().column(2).into_owned();
        let chi = space.evaluate_dofs(&layout, &geom, &w).unwrap();
        let basis_l = MonomialBasis::new(1, geom.centroid, geom.diameter);
        let moments = moment_matrix(&space, &basis_l).unwrap();
        // (w, m_beta)/|K| computed from scratch equals the cell d.o.f.
        let true_moments = moments.tr_mul(&w) / geom.area;
        for beta in 0..layout.n_cell_dofs() {
            let dof = chi[layout.cell_moment_dof(beta)];
            assert!(
                (true_moments[beta] - dof).abs() < 1e-12,
                "moment {beta}: {} vs {dof}",
                true_moments[beta]
            );
        }
    }
}
