//! Gram matrices of scaled monomials over a polygon and direct L2
//! projection of data functions onto the monomial space.

use super::{poly_dim, MonomialBasis};
use super::quadrature::{integrate_polygon, triangle_rule, map_to_triangle, DATA_DEGREE};
use crate::error::{Result, VemError};
use crate::geometry::VirtualTriangulation;
use nalgebra::{Cholesky, DMatrix, DVector};

/// Ratio of the largest to smallest singular value of a square matrix.
pub fn spd_condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Mass matrix `(m_i, m_j)_K` of the scaled monomial basis, integrated over
/// the virtual triangulation with a rule exact for products of basis
/// functions.
pub fn monomial_mass_matrix(
    basis: &MonomialBasis,
    tri: &VirtualTriangulation,
) -> Result<DMatrix<f64>> {
    let n = basis.dim();
    let degree = (2 * basis.degree().max(0) as usize).max(1);
    let rule = triangle_rule(degree)?;
    let mut mass = DMatrix::zeros(n, n);
    for t in 0..tri.triangles.len() {
        let [a, b, c] = tri.triangle_points(t);
        for (p, w) in map_to_triangle(rule, a, b, c) {
            let vals = basis.values(p);
            for i in 0..n {
                for j in i..n {
                    mass[(i, j)] += w * vals[i] * vals[j];
                }
            }
        }
    }
    // Fill the strictly lower triangle by symmetry.
    for i in 0..n {
        for j in 0..i {
            mass[(i, j)] = mass[(j, i)];
        }
    }
    Ok(mass)
}

/// Stiffness matrix `(grad m_i, grad m_j)_K` of the scaled monomial basis.
pub fn monomial_stiffness_matrix(
    basis: &MonomialBasis,
    tri: &VirtualTriangulation,
) -> Result<DMatrix<f64>> {
    let n = basis.dim();
    let degree = (2 * (basis.degree().max(1) - 1) as usize).max(1);
    let rule = triangle_rule(degree)?;
    let mut stiff = DMatrix::zeros(n, n);
    for t in 0..tri.triangles.len() {
        let [a, b, c] = tri.triangle_points(t);
        for (p, w) in map_to_triangle(rule, a, b, c) {
            for i in 0..n {
                let gi = basis.gradient(i, p);
                for j in i..n {
                    let gj = basis.gradient(j, p);
                    stiff[(i, j)] += w * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            stiff[(i, j)] = stiff[(j, i)];
        }
    }
    Ok(stiff)
}

/// L2-projects `f` onto the scaled monomial space of degree `l` over the
/// triangulated polygon, returning the coefficient vector in the monomial
/// basis. Fails with [`VemError::SingularMass`] when the Gram matrix is too
/// ill-conditioned to invert reliably.
pub fn project_l2_poly(
    basis: &MonomialBasis,
    tri: &VirtualTriangulation,
    f: impl Fn(crate::geometry::Point) -> f64,
) -> Result<DVector<f64>> {
    let n = basis.dim();
    assert_eq!(n, poly_dim(basis.degree()));
    let mass = monomial_mass_matrix(basis, tri)?;
    let cond = spd_condition(&mass);
    if !cond.is_finite() || cond > 1e14 {
        return Err(VemError::SingularMass { cond });
    }
    let mut rhs = DVector::zeros(n);
    for i in 0..n {
        rhs[i] = integrate_polygon(tri, DATA_DEGREE, |p| basis.value(i, p) * f(p))?;
    }
    let chol = Cholesky::new(mass.clone())
        .ok_or(VemError::SingularMass { cond })?;
    let coeffs = chol.solve(&rhs);
    // The residual must be orthogonal to the monomial space by construction.
    debug_assert!({
        let res = &rhs - &mass * &coeffs;
        res.amax() <= 1e-10 * rhs.amax().max(1.0)
    });
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_geometry, triangulate_polygon, QualityConfig};

    fn unit_square() -> (crate::geometry::PolygonGeometry, VirtualTriangulation) {
        let geom =
            polygon_geometry(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let tri = triangulate_polygon(&geom, &QualityConfig::default()).unwrap();
        (geom, tri)
    }

    fn basis_for(geom: &crate::geometry::PolygonGeometry, l: i32) -> MonomialBasis {
        MonomialBasis::new(l, geom.centroid, geom.diameter)
    }

    #[test]
    fn mass_matrix_entry_zero_zero_is_area() {
        let (geom, tri) = unit_square();
        let basis = basis_for(&geom, 2);
        let mass = monomial_mass_matrix(&basis, &tri).unwrap();
        // m_0 = 1, so the (0,0) entry is the area.
        assert!((mass[(0, 0)] - geom.area).abs() < 1e-14);
        assert_eq!(mass.nrows(), 6);
    }

    #[test]
    fn stiffness_first_row_is_zero() {
        let (geom, tri) = unit_square();
        let basis = basis_for(&geom, 2);
        let stiff = monomial_stiffness_matrix(&basis, &tri).unwrap();
        // The constant monomial has zero gradient.
        for j in 0..basis.dim() {
            assert!(stiff[(0, j)].abs() < 1e-15);
        }
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let (geom, tri) = unit_square();
        let basis = basis_for(&geom, 3);
        // f = x^2 y - y + 2, already in the space: the projection must match
        // f pointwise.
        let f = |p: crate::geometry::Point| p[0] * p[0] * p[1] - p[1] + 2.0;
        let coeffs = project_l2_poly(&basis, &tri, f).unwrap();
        for &p in [[0.3, 0.7], [0.95, 0.05], [0.5, 0.5]].iter() {
            let val = basis.eval(&coeffs, p);
            assert!((val - f(p)).abs() < 1e-12, "at {p:?}");
        }
    }

    #[test]
    fn projection_of_sine_constant_mode() {
        // On [0,1]^2 the mean of sin(pi x) is 2/pi; projecting onto constants
        // must recover it.
        let (geom, tri) = unit_square();
        let basis = basis_for(&geom, 0);
        let coeffs =
            project_l2_poly(&basis, &tri, |p| (std::f64::consts::PI * p[0]).sin()).unwrap();
        assert!((coeffs[0] - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    }
}
