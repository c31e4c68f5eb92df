use nalgebra::{Cholesky, Dyn};
use rayon::prelude::*;

use super::{LinearOperator, Preconditioner};
use crate::error::{Error, Result};
use crate::geometry::OversampleSpec;
use crate::interface::InterfaceOperator;
use crate::linalg::{cholesky_solve, dense_cholesky};
use crate::mortar_basis::MortarBasis;

/// Exact coarse correction `R (R^T A R)^{-1} R^T`.
#[derive(Debug, Clone)]
pub struct CoarseSpace {
    basis: MortarBasis,
    chol: Cholesky<f64, Dyn>,
}

impl CoarseSpace {
    pub fn new(op: &InterfaceOperator, basis: MortarBasis) -> Result<Self> {
        let a0 = op.galerkin_matrix(&basis)?;
        Self::from_matrix(basis, a0)
    }

    /// Uses a precomputed Galerkin matrix.
    pub fn from_matrix(basis: MortarBasis, a0: nalgebra::DMatrix<f64>) -> Result<Self> {
        let chol = dense_cholesky(a0, "coarse Galerkin matrix")?;
        Ok(Self { basis, chol })
    }

    pub fn basis(&self) -> &MortarBasis {
        &self.basis
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let rc = self.basis.restrict(r).expect("residual has the fine mortar dimension");
        self.basis
            .prolong(&cholesky_solve(&self.chol, &rc))
            .expect("coarse solution has the coarse dimension")
    }
}

#[derive(Debug, Clone)]
struct LocalProblem {
    dofs: Vec<usize>,
    /// Whether each entry of `dofs` lies on the subdomain's own coarse edge.
    own: Vec<bool>,
    chol: Cholesky<f64, Dyn>,
}

/// One local solve per coarse edge on the skeleton DOFs of its (possibly
/// oversampled) region. With oversampling the correction is written back to
/// the edge itself only, which makes the sum nonsymmetric.
#[derive(Debug, Clone)]
pub struct LocalSpace {
    dim: usize,
    domain: usize,
    problems: Vec<LocalProblem>,
}

impl LocalSpace {
    pub fn new(op: &InterfaceOperator, domain: usize) -> Result<Self> {
        let geom = op.geometry();
        let spec = OversampleSpec::domain(domain, geom.fine_per_block())?;
        let problems = (0..geom.num_coarse_edges())
            .into_par_iter()
            .map(|e| {
                let region = geom.oversample_region(e, &spec);
                let dofs = geom.edge_skeleton_dofs(&region);
                let own_range = geom.edge_dofs(e);
                let own = dofs.iter().map(|d| own_range.contains(d)).collect();
                let chol = dense_cholesky(op.assemble_block(&dofs), "local interface problem")?;
                Ok(LocalProblem { dofs, own, chol })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: op.dim(),
            domain,
            problems,
        })
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    /// True when some subdomain extends past its own edge.
    pub fn is_restrictive(&self) -> bool {
        self.problems.iter().any(|p| p.own.iter().any(|&o| !o))
    }

    pub fn subdomain_dofs(&self, edge: usize) -> &[usize] {
        &self.problems[edge].dofs
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let parts: Vec<Vec<f64>> = self
            .problems
            .par_iter()
            .map(|p| {
                let sub: Vec<f64> = p.dofs.iter().map(|&d| r[d]).collect();
                cholesky_solve(&p.chol, &sub)
            })
            .collect();
        let mut z = vec![0.0; self.dim];
        for (p, part) in self.problems.iter().zip(parts) {
            for ((&d, &own), v) in p.dofs.iter().zip(&p.own).zip(part) {
                if own {
                    z[d] += v;
                }
            }
        }
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// `C + L`
    Additive,
    /// `C + (I - C A) L (I - A C)`
    Hybrid,
    /// `(I - C) L (I - C)`, kept for comparison.
    HybridLiteral,
}

impl Composition {
    pub fn name(self) -> &'static str {
        match self {
            Composition::Additive => "additive",
            Composition::Hybrid => "hybrid",
            Composition::HybridLiteral => "hybrid_literal",
        }
    }
}

/// Coarse plus local two-level preconditioner.
pub struct TwoLevel<'a> {
    op: &'a dyn LinearOperator,
    coarse: &'a CoarseSpace,
    local: &'a LocalSpace,
    composition: Composition,
}

impl<'a> TwoLevel<'a> {
    pub fn new(op: &'a dyn LinearOperator, coarse: &'a CoarseSpace, local: &'a LocalSpace, composition: Composition) -> Self {
        Self {
            op,
            coarse,
            local,
            composition,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !self.local.is_restrictive() && self.composition != Composition::HybridLiteral
    }

    /// Refuses combinations that would feed PCG a nonsymmetric preconditioner.
    pub fn check_pcg(&self) -> Result<()> {
        if self.local.is_restrictive() {
            return Err(Error::NonSymmetricPcg {
                domain: self.local.domain(),
            });
        }
        Ok(())
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl Preconditioner for TwoLevel<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match self.composition {
            Composition::Additive => {
                let mut z = self.coarse.apply(r);
                z.iter_mut().zip(self.local.apply(r)).for_each(|(a, b)| *a += b);
                z
            }
            Composition::Hybrid => {
                let z0 = self.coarse.apply(r);
                let r1 = sub(r, &self.op.apply(&z0));
                if r1.iter().all(|&v| v == 0.0) {
                    return z0;
                }
                let z1 = self.local.apply(&r1);
                let back = self.coarse.apply(&self.op.apply(&z1));
                z0.iter().zip(&z1).zip(back).map(|((a, b), c)| a + b - c).collect()
            }
            Composition::HybridLiteral => {
                let t = sub(r, &self.coarse.apply(r));
                let t = self.local.apply(&t);
                sub(&t, &self.coarse.apply(&t))
            }
        }
    }
}
