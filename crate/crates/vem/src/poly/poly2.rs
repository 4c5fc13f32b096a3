//! Sparse bivariate polynomials in the global coordinates `x`, `y`.
//!
//! Used for manufactured solutions and right-hand sides given in closed
//! form; arithmetic stays exact (coefficient-wise) so that Laplacians of
//! test polynomials carry no quadrature error.

use crate::geometry::Point;
use std::collections::BTreeMap;

/// A polynomial `sum c_{ab} x^a y^b` with sparse coefficient storage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly2 {
    /// Map from exponent pair `(a, b)` to coefficient; zero coefficients are
    /// pruned so the representation is canonical.
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant polynomial `c`.
    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, c);
        p
    }

    /// The monomial `c x^a y^b`.
    pub fn monomial(a: u32, b: u32, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(a, b, c);
        p
    }

    /// Adds `c x^a y^b` in place.
    pub fn add_term(&mut self, a: u32, b: u32, c: f64) {
        let entry = self.terms.entry((a, b)).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&(a, b));
        }
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(a, b)| a + b).max()
    }

    /// Exponent/coefficient pairs in graded order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at a point.
    pub fn eval(&self, p: Point) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), &c)| c * p[0].powi(a as i32) * p[1].powi(b as i32))
            .sum()
    }

    /// Gradient at a point.
    pub fn eval_gradient(&self, p: Point) -> [f64; 2] {
        let mut g = [0.0, 0.0];
        for (&(a, b), &c) in &self.terms {
            if a > 0 {
                g[0] += c * a as f64 * p[0].powi(a as i32 - 1) * p[1].powi(b as i32);
            }
            if b > 0 {
                g[1] += c * b as f64 * p[0].powi(a as i32) * p[1].powi(b as i32 - 1);
            }
        }
        g
    }

    /// Coefficient-exact Laplacian.
    pub fn laplacian(&self) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(a, b), &c) in &self.terms {
            if a >= 2 {
                out.add_term(a - 2, b, c * (a * (a - 1)) as f64);
            }
            if b >= 2 {
                out.add_term(a, b - 2, c * (b * (b - 1)) as f64);
            }
        }
        out
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(a, b), &c) in &other.terms {
            out.add_term(a, b, c);
        }
        out
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(a1, b1), &c1) in &self.terms {
            for (&(a2, b2), &c2) in &other.terms {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(a, b), &c) in &self.terms {
            out.add_term(a, b, c * s);
        }
        out
    }

    /// Integer power.
    pub fn pow(&self, n: u32) -> Poly2 {
        let mut out = Poly2::constant(1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }
}
