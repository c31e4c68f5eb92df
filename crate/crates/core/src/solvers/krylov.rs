use nalgebra::{DMatrix, DVector};

use super::{LinearOperator, Preconditioner};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Relative tolerance on the true residual `|b - A x| / |b|`.
    pub tol: f64,
    /// PCG iterations, or GMRES restart cycles.
    pub max_iter: usize,
    /// GMRES restart length.
    pub restart: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 1000,
            restart: 30,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KrylovReport {
    /// PCG iterations, or GMRES outer cycles (a partial cycle counts as one).
    pub iterations: usize,
    /// Total GMRES Arnoldi steps; equal to `iterations` for PCG.
    pub inner_steps: usize,
    pub converged: bool,
    /// A full GMRES cycle that failed to reduce the residual.
    pub stagnated: bool,
    /// Relative residual after each iteration, starting with the initial one.
    pub history: Vec<f64>,
}

impl KrylovReport {
    pub fn final_residual(&self) -> f64 {
        self.history.last().copied().unwrap_or(0.0)
    }
}

fn check_dims(a: &dyn LinearOperator, m: &dyn Preconditioner, b: &[f64], x0: Option<&[f64]>) -> Result<()> {
    let n = a.dim();
    for found in [m.dim(), b.len(), x0.map_or(n, <[f64]>::len)] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    Ok(())
}

fn residual(a: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.apply(x);
    b.iter().zip(ax).map(|(bi, axi)| bi - axi).collect()
}

/// Preconditioned conjugate gradients for SPD `a` and `m`.
pub fn pcg(
    a: &dyn LinearOperator,
    m: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, KrylovReport)> {
    check_dims(a, m, b, x0)?;
    let n = a.dim();
    let bnorm = norm(b);
    let mut report = KrylovReport::default();
    if bnorm == 0.0 {
        report.converged = true;
        report.history.push(0.0);
        return Ok((vec![0.0; n], report));
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = if x0.is_some() { residual(a, b, &x) } else { b.to_vec() };
    let mut rel = norm(&r) / bnorm;
    report.history.push(rel);
    if rel <= opts.tol {
        report.converged = true;
        return Ok((x, report));
    }
    let mut z = m.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iter {
        if !(rz > 0.0) {
            return Err(Error::Breakdown {
                iteration: it,
                reason: "preconditioner is not positive definite",
            });
        }
        let ap = a.apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Breakdown {
                iteration: it,
                reason: "operator is not positive definite",
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        rel = norm(&r) / bnorm;
        report.history.push(rel);
        report.iterations = it;
        report.inner_steps = it;
        if rel <= opts.tol {
            report.converged = true;
            break;
        }
        z = m.apply(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok((x, report))
}

/// Restarted GMRES with right preconditioning, so the monitored residual is
/// the unpreconditioned one.
pub fn gmres(
    a: &dyn LinearOperator,
    m: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, KrylovReport)> {
    check_dims(a, m, b, x0)?;
    if opts.restart == 0 {
        return Err(Error::InvalidArgument("GMRES restart length must be positive".into()));
    }
    let n = a.dim();
    let bnorm = norm(b);
    let mut report = KrylovReport::default();
    if bnorm == 0.0 {
        report.converged = true;
        report.history.push(0.0);
        return Ok((vec![0.0; n], report));
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = residual(a, b, &x);
    let mut beta = norm(&r);
    report.history.push(beta / bnorm);
    if beta / bnorm <= opts.tol {
        report.converged = true;
        return Ok((x, report));
    }
    let mr = opts.restart.min(n);
    for cycle in 1..=opts.max_iter {
        let cycle_start = beta;
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(mr);
        let mut h = DMatrix::<f64>::zeros(mr + 1, mr);
        let (mut cs, mut sn) = (vec![0.0; mr], vec![0.0; mr]);
        let mut g = vec![0.0; mr + 1];
        g[0] = beta;
        let mut k = 0;
        while k < mr {
            let z = m.apply(&v[k]);
            let mut w = a.apply(&z);
            zs.push(z);
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(&w, vi);
                    h[(i, k)] += c;
                    axpy(-c, vi, &mut w);
                }
            }
            let wn = norm(&w);
            h[(k + 1, k)] = wn;
            for i in 0..k {
                let t = cs[i] * h[(i, k)] + sn[i] * h[(i + 1, k)];
                h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
                h[(i, k)] = t;
            }
            let d = h[(k, k)].hypot(h[(k + 1, k)]);
            if d == 0.0 {
                return Err(Error::Breakdown {
                    iteration: report.inner_steps + 1,
                    reason: "singular Hessenberg column",
                });
            }
            cs[k] = h[(k, k)] / d;
            sn[k] = h[(k + 1, k)] / d;
            h[(k, k)] = d;
            h[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            report.inner_steps += 1;
            let est = g[k].abs() / bnorm;
            if est <= opts.tol || wn <= 1e-14 * beta {
                break;
            }
            v.push(w.iter().map(|wi| wi / wn).collect());
        }
        let hk = h.view((0, 0), (k, k)).upper_triangle();
        let y = hk
            .solve_upper_triangular(&DVector::from_column_slice(&g[..k]))
            .ok_or(Error::Breakdown {
                iteration: report.inner_steps,
                reason: "singular least-squares system",
            })?;
        for (yi, z) in y.iter().zip(&zs) {
            axpy(*yi, z, &mut x);
        }
        r = residual(a, b, &x);
        beta = norm(&r);
        report.iterations = cycle;
        report.history.push(beta / bnorm);
        if beta / bnorm <= opts.tol {
            report.converged = true;
            break;
        }
        if k == mr && cycle_start - beta < 1e-14 * cycle_start {
            report.stagnated = true;
            break;
        }
    }
    Ok((x, report))
}
