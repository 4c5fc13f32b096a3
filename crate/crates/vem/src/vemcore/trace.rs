//! Reconstruction of a polynomial edge trace from edge d.o.f.
//!
//! On an edge, a virtual function of degree `k` restricts to a polynomial
//! of degree `k` that is uniquely determined by the `k + 1` edge d.o.f.:
//! the two endpoint values and the `k - 1` moments against powers of the
//! centered coordinate `xi = s/|e| - 1/2`. The trace matrix turns those
//! d.o.f. into the coefficients of the trace in the basis `xi^r`. It is
//! dimensionless, so one matrix per degree serves every edge.

use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Entry `(r, q)` is the coefficient of `xi^r` contributed by edge d.o.f.
/// `q`, where `q = 0, 1` are the values at `xi = -1/2, +1/2` and `q = 2 + j`
/// is the `j`-th moment. Columns follow [`EdgeFrame::trace_dofs`] order.
///
/// [`EdgeFrame::trace_dofs`]: crate::vemcore::EdgeFrame::trace_dofs
pub fn edge_trace_matrix(k: usize) -> &'static DMatrix<f64> {
    static CACHE: OnceLock<Vec<DMatrix<f64>>> = OnceLock::new();
    assert!((1..=4).contains(&k), "edge traces support degrees 1..=4");
    let cache = CACHE.get_or_init(|| (1..=4).map(build).collect());
    &cache[k - 1]
}

/// Builds the d.o.f.-evaluation matrix of the monomial trace basis and
/// inverts it. Row `q` holds d.o.f. `q` applied to each `xi^r`; endpoint
/// values are powers of -+1/2 and the `j`-th moment of `xi^r` is the
/// integral of `xi^{j+r}` over [-1/2, 1/2].
fn build(k: usize) -> DMatrix<f64> {
    let n = k + 1;
    let mut v = DMatrix::zeros(n, n);
    for r in 0..n {
        v[(0, r)] = (-0.5f64).powi(r as i32);
        v[(1, r)] = (0.5f64).powi(r as i32);
    }
    for j in 0..k.saturating_sub(1) {
        for r in 0..n {
            v[(2 + j, r)] = centered_power_integral(j + r);
        }
    }
    v.try_inverse()
        .expect("the edge d.o.f. are unisolvent on degree-k polynomials")
}

/// Integral of `xi^p` over [-1/2, 1/2].
fn centered_power_integral(p: usize) -> f64 {
    if p % 2 == 1 {
        0.0
    } else {
        (0.5f64).powi(p as i32) / (p as f64 + 1.0)
    }
}
