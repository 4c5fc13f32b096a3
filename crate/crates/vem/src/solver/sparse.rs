//! Compressed sparse row matrix and a Jacobi-preconditioned conjugate
//! gradient solver — the only linear algebra the global problem needs.

use nalgebra::DVector;

use crate::error::{Result, VemError};

/// Symmetric sparse matrix in compressed row storage.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix from (row, col, value) triplets, summing
    /// duplicates. The triplet list is sorted in place, so accumulation
    /// order — and with it the result, bit for bit — does not depend on the
    /// order the caller produced the entries in.
    pub fn from_triplets(n: usize, triplets: &mut [(usize, usize, f64)]) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets.iter() {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n} x {n}");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        col_idx.reserve(merged.len());
        values.reserve(merged.len());
        for (_, c, v) in merged {
            col_idx.push(c);
            values.push(v);
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_nonzeros(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as (column, value) pairs, ascending column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for (c, v) in self.row(i) {
                s += v * x[c];
            }
            y[i] = s;
        }
        y
    }

    pub fn diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                if c == i {
                    d[i] = v;
                }
            }
        }
        d
    }

    /// Largest asymmetry `|a_ij - a_ji|` over the stored pattern.
    pub fn symmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let mut vt = 0.0;
                for (c, w) in self.row(j) {
                    if c == i {
                        vt = w;
                    }
                }
                worst = worst.max((v - vt).abs());
            }
        }
        worst
    }
}

/// Solves `a x = b` for symmetric positive definite `a` by conjugate
/// gradients with the Jacobi (diagonal) preconditioner, from a zero initial
/// guess, to relative residual `tol`.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &DVector<f64>,
    tol: f64,
    max_iterations: usize,
) -> Result<DVector<f64>> {
    let n = a.n();
    assert_eq!(b.len(), n);
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(DVector::zeros(n));
    }
    let diag = a.diagonal();
    let precond = |r: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            if diag[i] > 0.0 {
                r[i] / diag[i]
            } else {
                r[i]
            }
        })
    };
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut residual = 1.0;
    for _ in 0..max_iterations {
        if r.norm() <= tol * b_norm {
            return Ok(x);
        }
        let ap = a.mul_vec(&p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(VemError::NotSpd(format!(
                "conjugate gradients found direction with curvature {pap:.3e}"
            )));
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        residual = r.norm() / b_norm;
        z = precond(&r);
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        p = &z + beta * &p;
    }
    if residual <= tol {
        Ok(x)
    } else {
        Err(VemError::MaxIterations {
            iterations: max_iterations,
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_csr(rows: &[&[f64]]) -> CsrMatrix {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        CsrMatrix::from_triplets(n, &mut triplets)
    }

    #[test]
    fn identity_solves_in_one_step() {
        let a = dense_to_csr(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = DVector::from_vec(vec![3.0, -4.0]);
        let x = cg_solve(&a, &b, 1e-12, 5).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12 && (x[1] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_oracle() {
        // [[2,1],[1,2]] x = [3,3] has the solution [1,1].
        let a = dense_to_csr(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let b = DVector::from_vec(vec![3.0, 3.0]);
        let x = cg_solve(&a, &b, 1e-12, 10).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let mut triplets = vec![(0, 0, 1.5), (0, 0, 0.5), (1, 1, 2.0), (0, 1, 1.0)];
        let a = CsrMatrix::from_triplets(2, &mut triplets);
        assert_eq!(a.n_nonzeros(), 3);
        let d = a.diagonal();
        assert_eq!(d[0], 2.0);
        assert_eq!(d[1], 2.0);
    }

    #[test]
    fn residual_contract_on_random_spd_system() {
        // A strictly diagonally dominant symmetric matrix is SPD; the solver
        // must meet its advertised relative residual.
        let n = 40;
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 4.0 + (i % 7) as f64));
            if i + 1 < n {
                triplets.push((i, i + 1, -1.0));
                triplets.push((i + 1, i, -1.0));
            }
            if i + 5 < n {
                triplets.push((i, i + 5, -0.5));
                triplets.push((i + 5, i, -0.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, &mut triplets);
        assert_eq!(a.symmetry_error(), 0.0);
        let b = DVector::from_fn(n, |i, _| ((i * 31 % 11) as f64) - 5.0);
        let tol = 1e-10;
        let x = cg_solve(&a, &b, tol, 1000).unwrap();
        let res = (&b - a.mul_vec(&x)).norm() / b.norm();
        assert!(res <= tol, "residual {res}");
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = dense_to_csr(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let b = DVector::from_vec(vec![3.0, 3.0]);
        let err = cg_solve(&a, &b, 1e-14, 0).unwrap_err();
        assert!(matches!(err, VemError::MaxIterations { .. }), "{err}");
    }
}
