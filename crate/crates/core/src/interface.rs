//! Reduced interface problem on the fine mortar space of the coarse skeleton.
//!
//! For a fine-mortar vector `xi`, every block is solved with `xi` as its
//! Dirichlet multiplier data and no source. `A xi` collects, on every
//! skeleton fine edge, minus the sum of the two neighbors' integrated outward
//! fluxes. With that sign `A` is symmetric positive definite and
//! `<A xi, xi> = ||q(xi)||^2_kappa`. The right-hand side collects the
//! outward fluxes of the source-only block solves, so `A xi = g` is exactly
//! the weak flux continuity across the skeleton.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{PermeabilityField, SourceField};
use crate::geometry::GridGeometry;
use crate::local_mixed::{assemble_block, cell_mass, LocalBlockSolver};
use crate::mortar_basis::MortarBasis;
use crate::solvers::LinearOperator;

/// Fine fields assembled over the whole domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    /// Outward normal flux per cell face (W, E, S, N), per unit length.
    pub flux: Vec<[f64; 4]>,
    /// Cell pressures.
    pub pressure: Vec<f64>,
    /// Multipliers on the fine-mortar DOFs of the skeleton.
    pub mortar: Vec<f64>,
}

impl GlobalSolution {
    /// Largest per-cell mismatch between the discrete divergence and the
    /// cell source, relative to the largest per-cell flux or source magnitude.
    pub fn conservation_defect(&self, geom: &GridGeometry, source: &SourceField) -> f64 {
        let h = geom.fine_size();
        let mut defect: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (cell, q) in self.flux.iter().enumerate() {
            let src = source.get(cell) * h * h;
            let div: f64 = q.iter().sum::<f64>() * h;
            defect = defect.max((div - src).abs());
            scale = scale.max(q.iter().map(|v| v.abs() * h).sum::<f64>()).max(src.abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// Relative L2 pressure error.
    pub e_u: f64,
    /// Relative flux error in the `kappa^-1`-weighted L2 norm.
    pub e_q: f64,
}

/// Squared `kappa^-1`-weighted L2 norm of a broken lowest-order flux field.
pub fn flux_energy(geom: &GridGeometry, kappa: &PermeabilityField, flux: &[[f64; 4]]) -> f64 {
    let h = geom.fine_size();
    flux.iter()
        .enumerate()
        .map(|(cell, q)| {
            let m = cell_mass(h, kappa.get(cell));
            (0..4).map(|a| (0..4).map(|b| q[a] * m[a][b] * q[b]).sum::<f64>()).sum::<f64>()
        })
        .sum()
}

pub fn error_metrics(
    coarse: &GlobalSolution,
    fine: &GlobalSolution,
    geom: &GridGeometry,
    kappa: &PermeabilityField,
) -> Result<ErrorReport> {
    let n = geom.num_cells();
    for len in [coarse.pressure.len(), fine.pressure.len(), coarse.flux.len(), fine.flux.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let u_ref: f64 = fine.pressure.iter().map(|u| u * u).sum();
    let u_err: f64 = coarse.pressure.iter().zip(&fine.pressure).map(|(a, b)| (a - b) * (a - b)).sum();
    let diff: Vec<[f64; 4]> = coarse
        .flux
        .iter()
        .zip(&fine.flux)
        .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
        .collect();
    let q_ref = flux_energy(geom, kappa, &fine.flux);
    let q_err = flux_energy(geom, kappa, &diff);
    if u_ref == 0.0 || q_ref == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    // the common h^2 cell area cancels in the pressure ratio
    Ok(ErrorReport {
        e_u: (u_err / u_ref).sqrt(),
        e_q: (q_err / q_ref).sqrt(),
    })
}

/// Matrix-free interface operator built from one factored solver per block.
#[derive(Debug, Clone)]
pub struct InterfaceOperator {
    geom: GridGeometry,
    kappa: PermeabilityField,
    blocks: Vec<LocalBlockSolver>,
}

impl InterfaceOperator {
    pub fn new(geom: &GridGeometry, kappa: &PermeabilityField) -> Result<Self> {
        if kappa.len() != geom.num_cells() {
            return Err(Error::ShapeMismatch {
                expected: geom.num_cells(),
                found: kappa.len(),
            });
        }
        let blocks = (0..geom.num_blocks())
            .into_par_iter()
            .map(|b| assemble_block(geom, kappa, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            geom: geom.clone(),
            kappa: kappa.clone(),
            blocks,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn permeability(&self) -> &PermeabilityField {
        &self.kappa
    }

    pub fn blocks(&self) -> &[LocalBlockSolver] {
        &self.blocks
    }

    /// Dimension of the fine mortar space.
    pub fn dim(&self) -> usize {
        self.geom.num_mortar_dofs()
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Scatters `sign * outflow` of every listed block into a dense vector,
    /// in block order.
    fn scatter(&self, per_block: Vec<(usize, Vec<f64>)>, sign: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (b, outflow) in per_block {
            for (dof, v) in self.blocks[b].perimeter_dofs().iter().zip(outflow) {
                if let Some(d) = dof {
                    out[*d] += sign * v;
                }
            }
        }
        out
    }

    /// `A xi`.
    pub fn apply(&self, xi: &[f64]) -> Vec<f64> {
        assert_eq!(xi.len(), self.dim(), "fine mortar vector has the wrong length");
        let per_block = self
            .blocks
            .par_iter()
            .map(|blk| {
                let trace = blk.gather(xi);
                let outflow = if trace.iter().all(|&t| t == 0.0) {
                    vec![0.0; trace.len()]
                } else {
                    blk.boundary_outflow(None, &trace)
                };
                (blk.block(), outflow)
            })
            .collect();
        self.scatter(per_block, -1.0)
    }

    pub fn try_apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_len(xi)?;
        Ok(self.apply(xi))
    }

    /// Right-hand side `g` of `A xi = g` for source `f`.
    pub fn rhs(&self, source: &SourceField) -> Vec<f64> {
        let per_block = self
            .blocks
            .par_iter()
            .map(|blk| {
                let zero = vec![0.0; blk.perimeter_dofs().len()];
                (blk.block(), blk.boundary_outflow(Some(source), &zero))
            })
            .collect();
        self.scatter(per_block, 1.0)
    }

    /// Sparse `A v` for `v` supported on a single coarse edge, given by its
    /// `n` values along the edge. Only the two adjacent blocks are solved.
    pub fn apply_edge_local(&self, edge: usize, values: &[f64]) -> Vec<(usize, f64)> {
        let n = self.geom.fine_per_block();
        assert_eq!(values.len(), n);
        let range = self.geom.edge_dofs(edge);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(8 * n);
        for &b in &self.geom.coarse_edge(edge).blocks {
            let blk = &self.blocks[b];
            let trace: Vec<f64> = blk
                .perimeter_dofs()
                .iter()
                .map(|d| match d {
                    Some(d) if range.contains(d) => values[d - range.start],
                    _ => 0.0,
                })
                .collect();
            let outflow = blk.boundary_outflow(None, &trace);
            for (dof, v) in blk.perimeter_dofs().iter().zip(outflow) {
                if let Some(d) = dof {
                    out.push((*d, -v));
                }
            }
        }
        out.sort_by_key(|&(d, _)| d);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(out.len());
        for (d, v) in out {
            match merged.last_mut() {
                Some((ld, lv)) if *ld == d => *lv += v,
                _ => merged.push((d, v)),
            }
        }
        merged
    }

    /// Column `A e_dof` in sparse form.
    pub fn column(&self, dof: usize) -> Vec<(usize, f64)> {
        let (edge, k) = self.geom.dof_location(dof);
        let mut values = vec![0.0; self.geom.fine_per_block()];
        values[k] = 1.0;
        self.apply_edge_local(edge, &values)
    }

    /// Dense principal block `A[S, S]` for the DOF list `S`, probing one unit
    /// vector per entry of `S`.
    pub fn assemble_block(&self, dofs: &[usize]) -> DMatrix<f64> {
        let m = dofs.len();
        let pos: std::collections::HashMap<usize, usize> = dofs.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let columns: Vec<Vec<(usize, f64)>> = dofs.par_iter().map(|&d| self.column(d)).collect();
        let mut a = DMatrix::zeros(m, m);
        for (c, col) in columns.iter().enumerate() {
            for &(d, v) in col {
                if let Some(&r) = pos.get(&d) {
                    a[(r, c)] = v;
                }
            }
        }
        a
    }

    /// The whole interface matrix; only sensible for small grids.
    pub fn assemble_dense(&self) -> DMatrix<f64> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.assemble_block(&all)
    }

    /// Galerkin matrix `R^T A R` for the block-diagonal prolongation of `basis`.
    pub fn galerkin_matrix(&self, basis: &MortarBasis) -> Result<DMatrix<f64>> {
        if basis.fine_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: basis.fine_dim(),
            });
        }
        let nc = basis.coarse_dim();
        let columns: Vec<Vec<(usize, f64)>> = (0..nc)
            .into_par_iter()
            .map(|c| {
                let (edge, mode) = basis.column_location(c);
                let ar = self.apply_edge_local(edge, &basis.modes(edge)[mode]);
                let mut col = Vec::new();
                let mut i = 0;
                while i < ar.len() {
                    let (e2, _) = self.geom.dof_location(ar[i].0);
                    let range = self.geom.edge_dofs(e2);
                    let mut local = vec![0.0; range.len()];
                    while i < ar.len() && range.contains(&ar[i].0) {
                        local[ar[i].0 - range.start] = ar[i].1;
                        i += 1;
                    }
                    for (m, phi) in basis.modes(e2).iter().enumerate() {
                        let v: f64 = phi.iter().zip(&local).map(|(a, b)| a * b).sum();
                        col.push((basis.column_index(e2, m), v));
                    }
                }
                col
            })
            .collect();
        let mut a0 = DMatrix::zeros(nc, nc);
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                a0[(r, c)] = v;
            }
        }
        Ok(a0)
    }

    /// Coarse operator action `xi_c -> R^T A R xi_c`.
    pub fn restrict_apply(&self, basis: &MortarBasis, coarse: &[f64]) -> Result<Vec<f64>> {
        let fine = basis.prolong(coarse)?;
        basis.restrict(&self.apply(&fine))
    }

    /// Recombines source and mortar parts block by block.
    pub fn recover(&self, xi: &[f64], source: &SourceField) -> Result<GlobalSolution> {
        self.check_len(xi)?;
        let n = self.geom.num_cells();
        let parts: Vec<_> = self
            .blocks
            .par_iter()
            .map(|blk| blk.solve(Some(source), &blk.gather(xi)))
            .collect();
        let mut flux = vec![[0.0; 4]; n];
        let mut pressure = vec![0.0; n];
        for (blk, sol) in self.blocks.iter().zip(parts) {
            for (local, (q, u)) in sol.flux.into_iter().zip(sol.pressure).enumerate() {
                let cell = blk.region().global_cell(local);
                flux[cell] = q;
                pressure[cell] = u;
            }
        }
        Ok(GlobalSolution {
            flux,
            pressure,
            mortar: xi.to_vec(),
        })
    }
}

impl LinearOperator for InterfaceOperator {
    fn dim(&self) -> usize {
        InterfaceOperator::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        InterfaceOperator::apply(self, x)
    }
}
