//! Dense symmetric generalized eigenvalue problems and orthogonal
//! complements, sized for single-element quadratic forms (tens of rows).

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Result, VemError};

/// Maximum number of cyclic Jacobi sweeps before giving up.
const MAX_SWEEPS: usize = 50;
/// Relative off-diagonal Frobenius norm at which the iteration stops.
const JACOBI_TOL: f64 = 1e-12;

/// All eigenvalues of `A x = lambda B x` for symmetric `A` and symmetric
/// positive definite `B`, in ascending order.
///
/// `B = L L^T` turns the pencil into the ordinary symmetric problem for
/// `C = L^-1 A L^-T`, which a cyclic Jacobi iteration diagonalizes. An
/// indefinite `B` is reported as [`VemError::NotSpd`], a stalled iteration
/// as [`VemError::NoConvergence`].
pub fn generalized_eig_sym(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(VemError::InvalidSize(format!(
            "eigenvalue pencil needs square matrices of one size, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let chol = Cholesky::new(b.clone())
        .ok_or_else(|| VemError::NotSpd("right-hand side of an eigenvalue pencil".into()))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(a)
        .ok_or_else(|| VemError::NotSpd("singular Cholesky factor".into()))?;
    // C = L^-1 (L^-1 A)^T is symmetric; symmetrize away the roundoff skew.
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| VemError::NotSpd("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    jacobi_eigenvalues(c)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
fn jacobi_eigenvalues(mut c: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = c.nrows();
    let scale = c.norm();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for sweeps in 0..=MAX_SWEEPS {
        let off = off_diagonal_norm(&c);
        if off <= JACOBI_TOL * scale {
            let mut vals: Vec<f64> = (0..n).map(|i| c[(i, i)]).collect();
            vals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return Ok(vals);
        }
        if sweeps == MAX_SWEEPS {
            return Err(VemError::NoConvergence { sweeps, off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = c[(p, q)];
                if apq.abs() <= f64::EPSILON * scale {
                    continue;
                }
                // Rotation angle that annihilates c[p, q], via the stable
                // smaller-root formula for tan(phi).
                let theta = (c[(q, q)] - c[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                rotate(&mut c, p, q, cos, sin, t, apq);
            }
        }
    }
    unreachable!("the sweep loop returns or errors before falling through");
}

/// Applies the symmetric two-sided rotation in the `(p, q)` plane in place.
fn rotate(c: &mut DMatrix<f64>, p: usize, q: usize, cos: f64, sin: f64, t: f64, apq: f64) {
    let n = c.nrows();
    for i in 0..n {
        if i == p || i == q {
            continue;
        }
        let cip = c[(i, p)];
        let ciq = c[(i, q)];
        let np = cos * cip - sin * ciq;
        let nq = sin * cip + cos * ciq;
        c[(i, p)] = np;
        c[(p, i)] = np;
        c[(i, q)] = nq;
        c[(q, i)] = nq;
    }
    c[(p, p)] -= t * apq;
    c[(q, q)] += t * apq;
    c[(p, q)] = 0.0;
    c[(q, p)] = 0.0;
}

fn off_diagonal_norm(c: &DMatrix<f64>) -> f64 {
    let n = c.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += c[(i, j)] * c[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Orthonormal basis of the Euclidean orthogonal complement of the column
/// span of `constraints` in `R^n`, as the columns of an `n x (n - rank)`
/// matrix.
///
/// The constraint columns are orthonormalized first (rank-revealing against
/// each column's own norm), then identity columns are filtered through the
/// accumulated basis until the complement is full. Two orthogonalization
/// passes keep the result orthonormal to machine precision.
pub fn complement_basis(constraints: &DMatrix<f64>) -> DMatrix<f64> {
    let n = constraints.nrows();
    let mut kept: Vec<DVector<f64>> = Vec::new();
    for j in 0..constraints.ncols() {
        let mut v = constraints.column(j).into_owned();
        let scale = v.norm().max(1.0);
        orthogonalize(&mut v, &kept, &[]);
        let norm = v.norm();
        if norm > 1e-12 * scale {
            kept.push(v / norm);
        }
    }
    let rank = kept.len();
    let mut complement: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        if rank + complement.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        orthogonalize(&mut v, &kept, &complement);
        let norm = v.norm();
        if norm > 1e-8 {
            complement.push(v / norm);
        }
    }
    assert_eq!(
        rank + complement.len(),
        n,
        "identity columns must complete an orthonormal basis"
    );
    if complement.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&complement)
    }
}

/// Two passes of modified Gram-Schmidt against both basis sets.
fn orthogonalize(v: &mut DVector<f64>, first: &[DVector<f64>], second: &[DVector<f64>]) {
    for _ in 0..2 {
        for u in first.iter().chain(second.iter()) {
            let d = u.dot(v);
            v.axpy(-d, u, 1.0);
        }
    }
}
