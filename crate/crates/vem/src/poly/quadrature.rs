//! Quadrature on reference triangles and edges.
//!
//! Triangle rules are stated in barycentric coordinates on the reference
//! triangle with vertices (0,0), (1,0), (0,1); their weights are positive
//! and sum to the reference area 1/2. Degrees 1 and 2 are the classical
//! centroid and three-point symmetric rules; higher degrees come from tensor
//! Gauss-Legendre rules on the collapsed unit square, which keeps every
//! weight positive and every point strictly inside for all supported
//! degrees.

use crate::error::{Result, VemError};
use crate::geometry::{Point, VirtualTriangulation};
use std::sync::OnceLock;

/// Highest supported polynomial exactness degree for triangle rules.
pub const MAX_DEGREE: usize = 14;

/// Exactness degree used for integrals of non-polynomial data (right-hand
/// sides, exact solutions, boundary data). At this degree the rules resolve
/// smooth integrands to near machine precision on desk-scale cells.
pub const DATA_DEGREE: usize = 14;

/// Gauss point count used for edge integrals of non-polynomial data
/// (exact through polynomial degree 15).
pub const EDGE_DATA_POINTS: usize = 8;

/// A quadrature rule on the reference triangle.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Exactness degree: all monomials of total degree <= degree integrate
    /// exactly.
    pub degree: usize,
    /// Barycentric coordinates of the points.
    pub points: Vec<[f64; 3]>,
    /// Weights; positive, summing to 1/2.
    pub weights: Vec<f64>,
}

/// A Gauss-Legendre rule on [0, 1].
#[derive(Debug, Clone)]
pub struct GaussEdgeRule {
    /// Points in (0, 1).
    pub points: Vec<f64>,
    /// Weights summing to 1.
    pub weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Deterministic and accurate to machine precision.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
        if n % 2 == 1 && i == n / 2 {
            nodes[i] = 0.0;
        }
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to [0, 1], cached per point count.
pub fn edge_rule(n: usize) -> &'static GaussEdgeRule {
    static CACHE: OnceLock<Vec<GaussEdgeRule>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (1..=16)
            .map(|m| {
                let (x, w) = gauss_legendre(m);
                GaussEdgeRule {
                    points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
                    weights: w.iter().map(|t| 0.5 * t).collect(),
                }
            })
            .collect()
    });
    assert!((1..=16).contains(&n), "edge rule supports 1..=16 points");
    &cache[n - 1]
}

fn build_rule(degree: usize) -> QuadratureRule {
    match degree {
        1 => QuadratureRule {
            degree: 1,
            points: vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
        },
        2 => {
            let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
            QuadratureRule {
                degree: 2,
                points: vec![[a, b, b], [b, a, b], [b, b, a]],
                weights: vec![1.0 / 6.0; 3],
            }
        }
        d => {
            // Collapsed square: x = u, y = v (1 - u) maps [0,1]^2 onto the
            // reference triangle with Jacobian (1 - u). A degree-d integrand
            // becomes degree d+1 in u and degree d in v.
            let nu = (d + 2).div_ceil(2);
            let nv = (d + 1).div_ceil(2);
            let gu = edge_rule(nu);
            let gv = edge_rule(nv);
            let mut points = Vec::with_capacity(nu * nv);
            let mut weights = Vec::with_capacity(nu * nv);
            for (iu, &u) in gu.points.iter().enumerate() {
                for (iv, &v) in gv.points.iter().enumerate() {
                    let x = u;
                    let y = v * (1.0 - u);
                    points.push([1.0 - x - y, x, y]);
                    weights.push(gu.weights[iu] * gv.weights[iv] * (1.0 - u));
                }
            }
            QuadratureRule {
                degree: d,
                points,
                weights,
            }
        }
    }
}

/// Triangle rule of exactness degree `d` (1 through [`MAX_DEGREE`]).
pub fn triangle_rule(d: usize) -> Result<&'static QuadratureRule> {
    static CACHE: OnceLock<Vec<QuadratureRule>> = OnceLock::new();
    if d == 0 || d > MAX_DEGREE {
        return Err(VemError::UnsupportedDegree(d));
    }
    let cache = CACHE.get_or_init(|| (1..=MAX_DEGREE).map(build_rule).collect());
    Ok(&cache[d - 1])
}

/// Maps a reference rule to the physical triangle `(a, b, c)` and returns
/// `(point, weight)` pairs; weights sum to the triangle area.
pub fn map_to_triangle(
    rule: &QuadratureRule,
    a: Point,
    b: Point,
    c: Point,
) -> impl Iterator<Item = (Point, f64)> + '_ {
    let jac = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    rule.points
        .iter()
        .zip(rule.weights.iter())
        .map(move |(&[l1, l2, l3], &w)| {
            let p = [
                l1 * a[0] + l2 * b[0] + l3 * c[0],
                l1 * a[1] + l2 * b[1] + l3 * c[1],
            ];
            (p, w * jac)
        })
}

/// Integrates `f` over one physical triangle with exactness degree `d`.
pub fn integrate_triangle(
    a: Point,
    b: Point,
    c: Point,
    d: usize,
    mut f: impl FnMut(Point) -> f64,
) -> Result<f64> {
    let rule = triangle_rule(d)?;
    Ok(map_to_triangle(rule, a, b, c)
        .map(|(p, w)| w * f(p))
        .sum())
}

/// Integrates `f` over a triangulated polygon with exactness degree `d`.
pub fn integrate_polygon(
    tri: &VirtualTriangulation,
    d: usize,
    mut f: impl FnMut(Point) -> f64,
) -> Result<f64> {
    let rule = triangle_rule(d)?;
    let mut total = 0.0;
    for t in 0..tri.triangles.len() {
        let [a, b, c] = tri.triangle_points(t);
        total += map_to_triangle(rule, a, b, c)
            .map(|(p, w)| w * f(p))
            .sum::<f64>();
    }
    Ok(total)
}

/// Integrates `f` along the segment from `a` to `b` with an `n`-point Gauss
/// rule; `f` receives the physical point and the arc-length parameter
/// measured from `a`.
pub fn integrate_edge(
    a: Point,
    b: Point,
    n: usize,
    mut f: impl FnMut(Point, f64) -> f64,
) -> f64 {
    let rule = edge_rule(n);
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let mut total = 0.0;
    for (&t, &w) in rule.points.iter().zip(rule.weights.iter()) {
        let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        total += w * len * f(p, t * len);
    }
    total
}
