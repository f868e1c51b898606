//! Compressed sparse rows and Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row (column, value) lists; columns within a row are
    /// stored in ascending order.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        par::for_each_mut(out, |i, o| {
            *o = self.row(i).map(|(c, v)| v * x[c]).sum();
        });
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            self.row(i)
                .all(|(j, v)| (self.get(j, i) - v).abs() <= tol * v.abs().max(1.0))
        })
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// ‖b - Ax‖ / ‖b‖ at exit (0 for a zero right-hand side).
    pub relative_residual: f64,
}

/// Solves Ax = b for symmetric positive-definite A, starting from x = 0.
/// Stops once the true residual satisfies ‖b − Ax‖ ≤ tol·‖b‖; if the
/// recurred residual has drifted below it, CG restarts from the true one.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, CgOutcome)> {
    let n = a.n;
    let mut x = vec![0.0; n];
    let b_norm = par::dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((
            x,
            CgOutcome {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = par::dot(&r, &z);
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = par::dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver {
                iterations: it,
                residual: par::dot(&r, &r).sqrt() / b_norm,
            });
        }
        let alpha = rz / pap;
        par::for_each_mut(&mut x, |i, xi| *xi += alpha * p[i]);
        par::for_each_mut(&mut r, |i, ri| *ri -= alpha * ap[i]);
        let res = par::dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            // confirm against the true residual
            a.matvec(&x, &mut ap);
            let true_res = par::sum_indexed(n, |i| (b[i] - ap[i]).powi(2)).sqrt() / b_norm;
            if true_res <= tol {
                return Ok((
                    x,
                    CgOutcome {
                        iterations: it,
                        relative_residual: true_res,
                    },
                ));
            }
            // the recurrence drifted: restart from the true residual
            par::for_each_mut(&mut r, |i, ri| *ri = b[i] - ap[i]);
            par::for_each_mut(&mut z, |i, zi| *zi = r[i] * inv_diag[i]);
            rz = par::dot(&r, &z);
            p.copy_from_slice(&z);
            continue;
        }
        par::for_each_mut(&mut z, |i, zi| *zi = r[i] * inv_diag[i]);
        let rz_new = par::dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        par::for_each_mut(&mut p, |i, pi| *pi = z[i] + beta * *pi);
    }
    Err(Error::Solver {
        iterations: max_iter,
        residual: par::dot(&r, &r).sqrt() / b_norm,
    })
}
