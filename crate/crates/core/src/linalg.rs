//! Small linear-algebra kernels: an envelope (skyline) Cholesky for the
//! banded SPD multiplier systems and a few dense-vector helpers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Cholesky factor `A = L L^T` stored by rows over each row's envelope.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors the symmetric matrix given by `entries`. Entries may repeat
    /// (they are summed); only the lower triangle (`col <= row`) is read.
    pub fn factor(n: usize, entries: &[(usize, usize, f64)], context: &'static str) -> Result<Self> {
        let mut first: Vec<usize> = (0..n).collect();
        for &(r, c, _) in entries {
            if c <= r {
                first[r] = first[r].min(c);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for r in 0..n {
            offset.push(offset[r] + r - first[r] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        for &(r, c, v) in entries {
            if c <= r {
                data[offset[r] + c - first[r]] += v;
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_i = &data[offset[i] + k0 - fi..offset[i] + j - fi];
                let row_j = &data[offset[j] + k0 - fj..offset[j] + j - fj];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let s = data[offset[i] + j - fi] - dot;
                if j < i {
                    let djj = data[offset[j + 1] - 1];
                    data[offset[i] + j - fi] = s / djj;
                } else {
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(Error::SingularFactorization {
                            context,
                            pivot: i,
                            value: s,
                        });
                    }
                    data[offset[i] + j - fi] = s.sqrt();
                }
            }
        }
        Ok(Self { first, offset, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&x[fi..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (xk, l) in x[fi..i].iter_mut().zip(&row[..i - fi]) {
                *xk -= l * xi;
            }
        }
    }
}

/// Dense Cholesky with a descriptive error instead of `None`.
pub fn dense_cholesky(m: DMatrix<f64>, context: &'static str) -> Result<Cholesky<f64, Dyn>> {
    let n = m.nrows();
    Cholesky::new(m).ok_or(Error::SingularFactorization {
        context,
        pivot: n,
        value: f64::NAN,
    })
}

pub fn cholesky_solve(chol: &Cholesky<f64, Dyn>, b: &[f64]) -> Vec<f64> {
    chol.solve(&DVector::from_column_slice(b)).as_slice().to_vec()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
