use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PermeabilityField, SourceField};
use crate::geometry::GridGeometry;
use crate::interface::{error_metrics, GlobalSolution, InterfaceOperator};
use crate::linalg::{cholesky_solve, dense_cholesky};
use crate::local_mixed::monolithic_fine_solve;
use crate::mortar_basis::{basis_candidates, build_mortar_basis, BasisKind, MortarBasis};
use crate::solvers::{gmres, pcg, CoarseSpace, Composition, KrylovOptions, KrylovReport, LocalSpace, TwoLevel};

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub contrast: f64,
    pub basis: BasisKind,
    pub nb: usize,
    pub e_u: f64,
    pub e_q: f64,
    /// Largest relative per-cell conservation defect of the recovered solution.
    pub conservation: f64,
}

/// Direct coarse solve of the interface problem on `basis`.
pub fn coarse_solve(op: &InterfaceOperator, basis: &MortarBasis, source: &SourceField) -> Result<GlobalSolution> {
    let a0 = op.galerkin_matrix(basis)?;
    let g0 = basis.restrict(&op.rhs(source))?;
    let chol = dense_cholesky(a0, "coarse Galerkin matrix")?;
    let xi = basis.prolong(&cholesky_solve(&chol, &g0))?;
    op.recover(&xi, source)
}

/// Columns of `full` that belong to the first `nb` modes of every edge.
fn nested_columns(full: &MortarBasis, nb: usize) -> Vec<usize> {
    (0..full.num_edges())
        .flat_map(|e| (0..nb).map(move |m| (e, m)))
        .map(|(e, m)| full.column_index(e, m))
        .collect()
}

/// Error of the coarse solution against the fine solution for every basis
/// kind and every `nb`. The Galerkin matrix is built once per kind at the
/// largest `nb`; smaller spaces are its nested principal blocks.
pub fn error_rows(
    geom: &GridGeometry,
    kappa: &PermeabilityField,
    source: &SourceField,
    contrast: f64,
    bases: &[BasisKind],
    nbs: &[usize],
    seed: u64,
) -> Result<Vec<ErrorRow>> {
    let nb_max = nbs.iter().copied().max().ok_or_else(|| Error::Config("empty Nb list".into()))?;
    let op = InterfaceOperator::new(geom, kappa)?;
    let fine = monolithic_fine_solve(geom, kappa, source)?;
    let g = op.rhs(source);
    let mut rows = Vec::new();
    for &kind in bases {
        let ctx = |e: Error| e.context(format!("basis {} at contrast {contrast:e}", kind.name()));
        let cands = basis_candidates(geom, kappa, kind, seed).map_err(ctx)?;
        let full = build_mortar_basis(geom, &cands, nb_max).map_err(ctx)?;
        let a_full = op.galerkin_matrix(&full)?;
        let g_full = full.restrict(&g)?;
        let per_nb = nbs
            .par_iter()
            .map(|&nb| {
                let cols = nested_columns(&full, nb);
                let a0 = DMatrix::from_fn(cols.len(), cols.len(), |i, j| a_full[(cols[i], cols[j])]);
                let g0: Vec<f64> = cols.iter().map(|&c| g_full[c]).collect();
                let chol = dense_cholesky(a0, "coarse Galerkin matrix")?;
                let basis = full.truncated(nb)?;
                let xi = basis.prolong(&cholesky_solve(&chol, &g0))?;
                let sol = op.recover(&xi, source)?;
                let err = error_metrics(&sol, &fine, geom, kappa)?;
                Ok(ErrorRow {
                    contrast,
                    basis: kind,
                    nb,
                    e_u: err.e_u,
                    e_q: err.e_q,
                    conservation: sol.conservation_defect(geom, source),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(ctx)?;
        rows.extend(per_nb);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Pcg,
    Gmres,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Pcg => "pcg",
            SolverKind::Gmres => "gmres",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub contrast: f64,
    pub coarse: BasisKind,
    pub nb: usize,
    pub domain: usize,
    pub composition: Composition,
    pub solver: SolverKind,
    pub iterations: usize,
    pub converged: bool,
}

/// One preconditioned solve of the fine interface system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecondCase {
    pub coarse: BasisKind,
    pub nb: usize,
    pub domain: usize,
    pub composition: Composition,
    pub solver: SolverKind,
}

/// Runs every case on one field; coarse and local spaces are shared between
/// cases that use the same ones.
pub fn iteration_rows(
    geom: &GridGeometry,
    kappa: &PermeabilityField,
    source: &SourceField,
    contrast: f64,
    cases: &[PrecondCase],
    opts: &KrylovOptions,
    seed: u64,
) -> Result<(Vec<IterationRow>, Vec<KrylovReport>)> {
    let op = InterfaceOperator::new(geom, kappa)?;
    let b = op.rhs(source);
    let mut coarse_cache: Vec<((BasisKind, usize), CoarseSpace)> = Vec::new();
    let mut local_cache: Vec<(usize, LocalSpace)> = Vec::new();
    let mut rows = Vec::with_capacity(cases.len());
    let mut reports = Vec::with_capacity(cases.len());
    for case in cases {
        if !coarse_cache.iter().any(|(k, _)| *k == (case.coarse, case.nb)) {
            let cands = basis_candidates(geom, kappa, case.coarse, seed)?;
            let basis = build_mortar_basis(geom, &cands, case.nb)?;
            coarse_cache.push(((case.coarse, case.nb), CoarseSpace::new(&op, basis)?));
        }
        if !local_cache.iter().any(|(d, _)| *d == case.domain) {
            local_cache.push((case.domain, LocalSpace::new(&op, case.domain)?));
        }
        let coarse = &coarse_cache.iter().find(|(k, _)| *k == (case.coarse, case.nb)).unwrap().1;
        let local = &local_cache.iter().find(|(d, _)| *d == case.domain).unwrap().1;
        let prec = TwoLevel::new(&op, coarse, local, case.composition);
        let (_, report) = match case.solver {
            SolverKind::Pcg => {
                prec.check_pcg()?;
                pcg(&op, &prec, &b, None, opts)?
            }
            SolverKind::Gmres => gmres(&op, &prec, &b, None, opts)?,
        };
        rows.push(IterationRow {
            contrast,
            coarse: case.coarse,
            nb: case.nb,
            domain: case.domain,
            composition: case.composition,
            solver: case.solver,
            iterations: report.iterations,
            converged: report.converged,
        });
        reports.push(report);
    }
    Ok((rows, reports))
}
