//! Scaled monomial bases, quadrature, and polynomial utilities.

mod poly2;
mod projection;
mod quadrature;

pub use poly2::Poly2;
pub use projection::{
    monomial_mass_matrix, monomial_stiffness_matrix, project_l2_poly, spd_condition,
};
pub use quadrature::{
    edge_rule, integrate_edge, integrate_polygon, integrate_triangle, map_to_triangle,
    triangle_rule, GaussEdgeRule, QuadratureRule, DATA_DEGREE, EDGE_DATA_POINTS, MAX_DEGREE,
};

use crate::geometry::Point;
use nalgebra::DVector;

/// Dimension of the polynomial space of total degree at most `l` in two
/// variables; zero when `l` is -1 (the empty space).
pub fn poly_dim(l: i32) -> usize {
    if l < 0 {
        0
    } else {
        ((l + 1) * (l + 2) / 2) as usize
    }
}

/// Monomials on a 2D domain, scaled and centered: the basis entry with
/// exponents `(a, b)` is `((x - xc)/h)^a * ((y - yc)/h)^b`, where `xc` is the
/// domain's scaling center and `h` its diameter. Entries are ordered by
/// total degree and, within a degree, by decreasing first exponent:
/// `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`. All entries are bounded
/// by 1 in absolute value on the domain.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    degree: i32,
    exponents: Vec<(u32, u32)>,
    center: Point,
    h: f64,
}

impl MonomialBasis {
    /// Basis of total degree at most `l >= -1` on the domain with the given
    /// scaling center and diameter.
    pub fn new(l: i32, center: Point, h: f64) -> Self {
        assert!(l >= -1, "degree must be at least -1");
        assert!(h > 0.0, "diameter must be positive");
        let mut exponents = Vec::with_capacity(poly_dim(l));
        for d in 0..=l.max(-1) {
            for b in 0..=d {
                exponents.push(((d - b) as u32, b as u32));
            }
        }
        MonomialBasis {
            degree: l,
            exponents,
            center,
            h,
        }
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exponents
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn diameter(&self) -> f64 {
        self.h
    }

    /// Position of the monomial with exponents `(a, b)`.
    pub fn index_of(&self, a: u32, b: u32) -> usize {
        let d = a + b;
        (d * (d + 1) / 2 + b) as usize
    }

    #[inline]
    fn local(&self, p: Point) -> (f64, f64) {
        (
            (p[0] - self.center[0]) / self.h,
            (p[1] - self.center[1]) / self.h,
        )
    }

    /// Value of monomial `j` at `p`.
    pub fn value(&self, j: usize, p: Point) -> f64 {
        let (xi, eta) = self.local(p);
        let (a, b) = self.exponents[j];
        xi.powi(a as i32) * eta.powi(b as i32)
    }

    /// All monomial values at `p`.
    pub fn values(&self, p: Point) -> DVector<f64> {
        DVector::from_fn(self.dim(), |j, _| self.value(j, p))
    }

    /// Gradient of monomial `j` at `p`.
    pub fn gradient(&self, j: usize, p: Point) -> [f64; 2] {
        let (xi, eta) = self.local(p);
        let (a, b) = self.exponents[j];
        let (a, b) = (a as i32, b as i32);
        let gx = if a == 0 {
            0.0
        } else {
            a as f64 / self.h * xi.powi(a - 1) * eta.powi(b)
        };
        let gy = if b == 0 {
            0.0
        } else {
            b as f64 / self.h * xi.powi(a) * eta.powi(b - 1)
        };
        [gx, gy]
    }

    /// Laplacian of monomial `j` at `p`.
    pub fn laplacian(&self, j: usize, p: Point) -> f64 {
        let (xi, eta) = self.local(p);
        let (a, b) = self.exponents[j];
        let (a, b) = (a as i32, b as i32);
        let h2 = self.h * self.h;
        let mut lap = 0.0;
        if a >= 2 {
            lap += (a * (a - 1)) as f64 / h2 * xi.powi(a - 2) * eta.powi(b);
        }
        if b >= 2 {
            lap += (b * (b - 1)) as f64 / h2 * xi.powi(a) * eta.powi(b - 2);
        }
        lap
    }

    /// Expansion of the Laplacian of monomial `j` in this same basis. The
    /// result pairs `(index, coefficient)` refer to monomials of total
    /// degree two lower, so they always exist within the basis.
    pub fn laplacian_coefficients(&self, j: usize) -> Vec<(usize, f64)> {
        let (a, b) = self.exponents[j];
        let h2 = self.h * self.h;
        let mut out = Vec::with_capacity(2);
        if a >= 2 {
            out.push((self.index_of(a - 2, b), (a * (a - 1)) as f64 / h2));
        }
        if b >= 2 {
            out.push((self.index_of(a, b - 2), (b * (b - 1)) as f64 / h2));
        }
        out
    }

    /// Evaluates the polynomial with the given coefficient vector at `p`.
    pub fn eval(&self, coeffs: &DVector<f64>, p: Point) -> f64 {
        (0..self.dim()).map(|j| coeffs[j] * self.value(j, p)).sum()
    }

    /// Gradient of the polynomial with the given coefficients at `p`.
    pub fn eval_gradient(&self, coeffs: &DVector<f64>, p: Point) -> [f64; 2] {
        let mut g = [0.0, 0.0];
        for j in 0..self.dim() {
            let gj = self.gradient(j, p);
            g[0] += coeffs[j] * gj[0];
            g[1] += coeffs[j] * gj[1];
        }
        g
    }
}
