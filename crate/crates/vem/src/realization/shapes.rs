//! Lagrange shape functions of degree 1..4 on a triangle.
//!
//! Nodes sit at the barycentric lattice points (i, j, m)/k, i + j + m = k,
//! and the shape function of node (i, j, m) is the product
//! `P_i(lambda_1) P_j(lambda_2) P_m(lambda_3)` of one-dimensional factors
//! `P_a(x) = prod_{q<a} (k x - q)/(a - q)`, which is 1 at its own lattice
//! point and 0 at every other one.

use crate::geometry::Point;

/// Barycentric lattice multi-indices `(i, j, m)` with `i + j + m = k`, in a
/// fixed deterministic order (`i` descending, then `j` descending).
pub fn local_multi_indices(k: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity((k + 1) * (k + 2) / 2);
    for i in (0..=k as u32).rev() {
        for j in (0..=(k as u32 - i)).rev() {
            out.push([i, j, k as u32 - i - j]);
        }
    }
    out
}

/// One-dimensional factor `P_a(x) = prod_{q<a} (k x - q)/(a - q)`.
fn p_factor(a: u32, k: usize, x: f64) -> f64 {
    (0..a)
        .map(|q| (k as f64 * x - q as f64) / (a - q) as f64)
        .product()
}

/// Derivative of [`p_factor`] with respect to `x`, by the product rule
/// (stable at the lattice points where individual factors vanish).
fn p_factor_deriv(a: u32, k: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    for dropped in 0..a {
        let mut prod = k as f64 / (a - dropped) as f64;
        for q in 0..a {
            if q != dropped {
                prod *= (k as f64 * x - q as f64) / (a - q) as f64;
            }
        }
        sum += prod;
    }
    sum
}

/// Shape function of multi-index `idx` at barycentric coordinates `lambda`.
pub fn shape_value(idx: [u32; 3], k: usize, lambda: [f64; 3]) -> f64 {
    p_factor(idx[0], k, lambda[0]) * p_factor(idx[1], k, lambda[1]) * p_factor(idx[2], k, lambda[2])
}

/// Gradient of the shape function with respect to the physical coordinates,
/// given the (constant) barycentric gradients of the triangle.
pub fn shape_gradient(
    idx: [u32; 3],
    k: usize,
    lambda: [f64; 3],
    grad_lambda: [[f64; 2]; 3],
) -> [f64; 2] {
    let p = [
        p_factor(idx[0], k, lambda[0]),
        p_factor(idx[1], k, lambda[1]),
        p_factor(idx[2], k, lambda[2]),
    ];
    let dp = [
        p_factor_deriv(idx[0], k, lambda[0]),
        p_factor_deriv(idx[1], k, lambda[1]),
        p_factor_deriv(idx[2], k, lambda[2]),
    ];
    let coeff = [dp[0] * p[1] * p[2], p[0] * dp[1] * p[2], p[0] * p[1] * dp[2]];
    let mut g = [0.0, 0.0];
    for v in 0..3 {
        g[0] += coeff[v] * grad_lambda[v][0];
        g[1] += coeff[v] * grad_lambda[v][1];
    }
    g
}

/// Constant barycentric gradients of the triangle `(a, b, c)`.
pub fn barycentric_gradients(a: Point, b: Point, c: Point) -> [[f64; 2]; 3] {
    let two_area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    [
        [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
        [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
        [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
    ]
}

/// One-dimensional Lagrange basis on the equispaced nodes `q/k`, `q = 0..k`,
/// evaluated at `x` in [0, 1].
pub fn lagrange_1d(k: usize, q: usize, x: f64) -> f64 {
    let mut prod = 1.0;
    for r in 0..=k {
        if r != q {
            prod *= (k as f64 * x - r as f64) / (q as f64 - r as f64);
        }
    }
    prod
}
