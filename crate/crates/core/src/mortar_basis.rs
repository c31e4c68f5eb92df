//! Enriched mortar spaces on the coarse skeleton.
//!
//! Every interior coarse edge gets an ordered list of modes over its `n` fine
//! edges. Mode 1 is always the normalized constant; the remaining modes are
//! either Legendre polynomials (the baseline) or dominant POD modes of local
//! harmonic snapshots computed on the edge neighborhood or an oversampled
//! region of it. Modes are orthonormal in the discrete `L2(E)` inner product
//! `<a, b> = h * sum_k a_k b_k`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PermeabilityField;
use crate::geometry::{CellRect, GridGeometry, OversampleSpec};
use crate::local_mixed::RegionSolver;

/// Post-orthogonalization norm below which a candidate mode is dropped.
pub const DROP_TOLERANCE: f64 = 1e-10;
/// Relative eigenvalue threshold defining the numerical rank of a snapshot set.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Snapshot construction variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotCase {
    /// All boundary indicators on the edge neighborhood (domain 1).
    Case1,
    /// All boundary indicators on domain 2.
    Case2,
    /// All boundary indicators on domain 3.
    Case3,
    /// `n + 2` random boundary vectors on domain 2.
    Case4,
}

impl SnapshotCase {
    pub fn domain_kind(self) -> usize {
        match self {
            SnapshotCase::Case1 => 1,
            SnapshotCase::Case2 | SnapshotCase::Case4 => 2,
            SnapshotCase::Case3 => 3,
        }
    }
}

/// Source of the enrichment modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Polynomial,
    Case1,
    Case2,
    Case3,
    Case4,
}

impl BasisKind {
    pub const ALL: [BasisKind; 5] = [
        BasisKind::Polynomial,
        BasisKind::Case1,
        BasisKind::Case2,
        BasisKind::Case3,
        BasisKind::Case4,
    ];

    pub fn snapshot_case(self) -> Option<SnapshotCase> {
        match self {
            BasisKind::Polynomial => None,
            BasisKind::Case1 => Some(SnapshotCase::Case1),
            BasisKind::Case2 => Some(SnapshotCase::Case2),
            BasisKind::Case3 => Some(SnapshotCase::Case3),
            BasisKind::Case4 => Some(SnapshotCase::Case4),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Polynomial => "polynomial",
            BasisKind::Case1 => "case1",
            BasisKind::Case2 => "case2",
            BasisKind::Case3 => "case3",
            BasisKind::Case4 => "case4",
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BasisKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown basis type `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Full,
    Randomized { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub edge: usize,
    /// One column per snapshot, restricted to the edge's `n` fine edges.
    pub traces: DMatrix<f64>,
    pub provenance: Provenance,
    pub domain: OversampleSpec,
    /// Columns that vanish once the constant component is removed.
    pub flagged: Vec<usize>,
}

impl SnapshotSet {
    /// Copy with the `L2(E)` mean removed from every column.
    pub fn without_constant(&self) -> SnapshotSet {
        let mut traces = self.traces.clone();
        for mut col in traces.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        SnapshotSet {
            traces,
            ..self.clone()
        }
    }
}

/// Factored local Dirichlet problem on a snapshot region.
#[derive(Debug, Clone)]
pub struct SnapshotSolver {
    solver: RegionSolver,
    trace_index: Vec<usize>,
}

impl SnapshotSolver {
    pub fn new(geom: &GridGeometry, kappa: &PermeabilityField, edge: usize, region: CellRect) -> Result<Self> {
        let solver = RegionSolver::new(geom, kappa, region)?;
        let trace_index = geom
            .edge_dofs(edge)
            .map(|dof| {
                solver.interior_index(geom.dof_fine_edge(dof)).ok_or_else(|| {
                    Error::InvalidArgument(format!("snapshot region does not contain coarse edge {edge} in its interior"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { solver, trace_index })
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.solver.perimeter().len()
    }

    /// Edge trace of the harmonic solution with the given boundary data.
    pub fn trace(&self, boundary: &[f64]) -> Vec<f64> {
        let lambda = self.solver.solve_multipliers(None, boundary);
        self.trace_index.iter().map(|&i| lambda[i]).collect()
    }

    /// Edge trace for the indicator of perimeter edge `mode`.
    pub fn indicator_trace(&self, mode: usize) -> Result<Vec<f64>> {
        let count = self.num_boundary_edges();
        if mode >= count {
            return Err(Error::ModeOutOfRange { index: mode, count });
        }
        let mut w = vec![0.0; count];
        w[mode] = 1.0;
        Ok(self.trace(&w))
    }
}

/// Trace on `edge` of the discrete harmonic function on `domain` whose
/// boundary multipliers are the indicator of perimeter edge `mode`.
pub fn harmonic_snapshot(
    geom: &GridGeometry,
    kappa: &PermeabilityField,
    edge: usize,
    domain: CellRect,
    mode: usize,
) -> Result<Vec<f64>> {
    SnapshotSolver::new(geom, kappa, edge, domain)?.indicator_trace(mode)
}

fn random_key(seed: u64, edge: usize, snapshot: usize) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(edge as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(snapshot as u64).to_le_bytes());
    key
}

pub fn snapshot_space(
    geom: &GridGeometry,
    kappa: &PermeabilityField,
    edge: usize,
    case: SnapshotCase,
    seed: u64,
) -> Result<SnapshotSet> {
    let n = geom.fine_per_block();
    let domain = OversampleSpec::domain(case.domain_kind(), n)?;
    let region = geom.oversample_region(edge, &domain);
    let solver = SnapshotSolver::new(geom, kappa, edge, region)?;
    let (columns, provenance) = match case {
        SnapshotCase::Case4 => {
            let count = n + 2;
            let cols = (0..count)
                .map(|s| {
                    let mut rng = ChaCha8Rng::from_seed(random_key(seed, edge, s));
                    let w: Vec<f64> = (0..solver.num_boundary_edges())
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect();
                    solver.trace(&w)
                })
                .collect::<Vec<_>>();
            (cols, Provenance::Randomized { count, seed })
        }
        _ => {
            let cols = (0..solver.num_boundary_edges())
                .map(|j| solver.indicator_trace(j))
                .collect::<Result<Vec<_>>>()?;
            (cols, Provenance::Full)
        }
    };
    let traces = DMatrix::from_fn(n, columns.len(), |r, c| columns[c][r]);
    let centered = SnapshotSet {
        edge,
        traces: traces.clone(),
        provenance,
        domain,
        flagged: Vec::new(),
    }
    .without_constant();
    let scale = traces.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let flagged = centered
        .traces
        .column_iter()
        .enumerate()
        .filter(|(_, c)| c.norm() <= RANK_TOLERANCE * scale)
        .map(|(j, _)| j)
        .collect();
    Ok(SnapshotSet {
        edge,
        traces,
        provenance,
        domain,
        flagged,
    })
}

/// POD modes ordered by decreasing eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct PodModes {
    /// `L2(E)`-normalized mode vectors.
    pub modes: Vec<Vec<f64>>,
    /// Eigenvalues of the snapshot correlation operator, nonincreasing.
    pub eigenvalues: Vec<f64>,
}

impl PodModes {
    pub fn rank(&self) -> usize {
        let max = self.eigenvalues.first().copied().unwrap_or(0.0);
        self.eigenvalues.iter().filter(|&&l| l > RANK_TOLERANCE * max).count()
    }
}

/// Complete eigendecomposition of the snapshot correlation operator
/// `v -> sum_j <psi_j, v> psi_j` in the `L2(E)` inner product with fine edge
/// length `h`. Every direction is returned, including the numerical kernel.
pub fn pod_all(traces: &DMatrix<f64>, h: f64) -> PodModes {
    let gram = traces * traces.transpose() * h;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let scale = 1.0 / h.sqrt();
    let mut modes = Vec::with_capacity(order.len());
    let mut eigenvalues = Vec::with_capacity(order.len());
    for i in order {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().map(|x| x * scale).collect();
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * max) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        modes.push(v);
        eigenvalues.push(eig.eigenvalues[i].max(0.0));
    }
    PodModes { modes, eigenvalues }
}

/// The `l` dominant POD modes of a snapshot set.
pub fn pod_reduce(snap: &SnapshotSet, l: usize, h: f64) -> Result<PodModes> {
    let all = pod_all(&snap.traces, h);
    let rank = all.rank();
    if l > rank {
        return Err(Error::RankDeficient { requested: l, rank });
    }
    Ok(PodModes {
        modes: all.modes[..l].to_vec(),
        eigenvalues: all.eigenvalues[..l].to_vec(),
    })
}

/// Summed squared `L2(E)` residual of projecting the columns onto the span of
/// the given orthonormal modes.
pub fn projection_residual(traces: &DMatrix<f64>, modes: &[Vec<f64>], h: f64) -> f64 {
    traces
        .column_iter()
        .map(|c| {
            let mut r: Vec<f64> = c.iter().copied().collect();
            for m in modes {
                let coef: f64 = h * m.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
                r.iter_mut().zip(m).for_each(|(x, y)| *x -= coef * y);
            }
            h * r.iter().map(|x| x * x).sum::<f64>()
        })
        .sum()
}

/// `L2(E)`-normalized constant on an edge of `n` fine edges of length `h`.
pub fn constant_mode(n: usize, h: f64) -> Vec<f64> {
    vec![1.0 / (n as f64 * h).sqrt(); n]
}

fn l2_dot(a: &[f64], b: &[f64], h: f64) -> f64 {
    h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// Gram-Schmidt (twice) of `candidates` after the constant mode. Returns the
/// accepted modes and the indices of dropped candidates.
fn orthonormalize(n: usize, h: f64, candidates: &[Vec<f64>], nb: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut modes = vec![constant_mode(n, h)];
    let mut dropped = Vec::new();
    for (idx, cand) in candidates.iter().enumerate() {
        if modes.len() >= nb {
            break;
        }
        let norm0 = l2_dot(cand, cand, h).sqrt();
        if norm0 == 0.0 || !norm0.is_finite() {
            dropped.push(idx);
            continue;
        }
        let mut v: Vec<f64> = cand.iter().map(|x| x / norm0).collect();
        for _ in 0..2 {
            for m in &modes {
                let c = l2_dot(m, &v, h);
                v.iter_mut().zip(m).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = l2_dot(&v, &v, h).sqrt();
        if norm < DROP_TOLERANCE {
            dropped.push(idx);
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        modes.push(v);
    }
    (modes, dropped)
}

fn legendre_antiderivative(degree: usize, s: f64) -> f64 {
    // integral of P_d from -1: (P_{d+1} - P_{d-1}) / (2d + 1) for d >= 1
    if degree == 0 {
        return s + 1.0;
    }
    let mut p = vec![1.0, s];
    for k in 1..=degree {
        let next = ((2 * k + 1) as f64 * s * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
        p.push(next);
    }
    (p[degree + 1] - p[degree - 1]) / (2 * degree + 1) as f64
}

/// Fine-edge averages of the Legendre polynomial of `degree` over an edge
/// of `n` fine edges mapped to `[-1, 1]`.
pub fn legendre_averages(degree: usize, n: usize) -> Vec<f64> {
    let ds = 2.0 / n as f64;
    (0..n)
        .map(|k| {
            let (a, b) = (-1.0 + k as f64 * ds, -1.0 + (k + 1) as f64 * ds);
            (legendre_antiderivative(degree, b) - legendre_antiderivative(degree, a)) / ds
        })
        .collect()
}

fn polynomial_candidates(n: usize) -> Vec<Vec<f64>> {
    (1..n).map(|d| legendre_averages(d, n)).collect()
}

/// Orthonormal Legendre modes of degree `0..nb` on `edge`.
pub fn polynomial_basis(geom: &GridGeometry, edge: usize, nb: usize) -> Result<Vec<Vec<f64>>> {
    let n = geom.fine_per_block();
    if nb == 0 || nb > n || edge >= geom.num_coarse_edges() {
        return Err(Error::InvalidArgument(format!(
            "polynomial basis needs 1 <= Nb <= n = {n} on a valid edge, got Nb = {nb}, edge = {edge}"
        )));
    }
    let (modes, _) = orthonormalize(n, geom.fine_size(), &polynomial_candidates(n), nb);
    Ok(modes)
}

/// Ordered enrichment candidates for one edge: the Legendre sequence for the
/// polynomial basis, otherwise the full POD eigenbasis of the centered
/// snapshots (dominant first).
pub fn edge_candidates(
    geom: &GridGeometry,
    kappa: &PermeabilityField,
    edge: usize,
    kind: BasisKind,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    match kind.snapshot_case() {
        None => Ok(polynomial_candidates(geom.fine_per_block())),
        Some(case) => {
            let snap = snapshot_space(geom, kappa, edge, case, seed)?.without_constant();
            Ok(pod_all(&snap.traces, geom.fine_size()).modes)
        }
    }
}

/// Candidates for every interior coarse edge, computed in parallel.
pub fn basis_candidates(
    geom: &GridGeometry,
    kappa: &PermeabilityField,
    kind: BasisKind,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    (0..geom.num_coarse_edges())
        .into_par_iter()
        .map(|e| edge_candidates(geom, kappa, e, kind, seed))
        .collect()
}

/// Block-diagonal prolongation from per-edge mode coefficients to the fine
/// mortar space.
#[derive(Debug, Clone, PartialEq)]
pub struct MortarBasis {
    n: usize,
    modes: Vec<Vec<Vec<f64>>>,
    offsets: Vec<usize>,
    dropped: Vec<(usize, usize)>,
}

impl MortarBasis {
    /// Wraps arbitrary per-edge mode vectors without orthonormalizing them.
    pub fn from_edge_modes(geom: &GridGeometry, modes: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = geom.fine_per_block();
        if modes.len() != geom.num_coarse_edges() {
            return Err(Error::DimensionMismatch {
                expected: geom.num_coarse_edges(),
                found: modes.len(),
            });
        }
        if let Some(bad) = modes.iter().flatten().find(|m| m.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let mut offsets = Vec::with_capacity(modes.len() + 1);
        offsets.push(0);
        for m in &modes {
            offsets.push(offsets.last().unwrap() + m.len());
        }
        Ok(Self {
            n,
            modes,
            offsets,
            dropped: Vec::new(),
        })
    }

    /// Identity prolongation: unit vectors on every fine edge.
    pub fn identity(geom: &GridGeometry) -> Self {
        let n = geom.fine_per_block();
        let unit = (0..n)
            .map(|k| {
                let mut v = vec![0.0; n];
                v[k] = 1.0;
                v
            })
            .collect::<Vec<_>>();
        Self::from_edge_modes(geom, vec![unit; geom.num_coarse_edges()]).expect("consistent shapes")
    }

    pub fn fine_dim(&self) -> usize {
        self.n * self.modes.len()
    }

    pub fn coarse_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn num_edges(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self, edge: usize) -> &[Vec<f64>] {
        &self.modes[edge]
    }

    /// Candidates dropped during orthogonalization, as `(edge, candidate)`.
    pub fn dropped(&self) -> &[(usize, usize)] {
        &self.dropped
    }

    pub fn column_index(&self, edge: usize, mode: usize) -> usize {
        self.offsets[edge] + mode
    }

    pub fn column_location(&self, column: usize) -> (usize, usize) {
        let edge = self.offsets.partition_point(|&o| o <= column) - 1;
        (edge, column - self.offsets[edge])
    }

    /// Fine mortar vector of coarse column `column`.
    pub fn column(&self, column: usize) -> Vec<f64> {
        let (edge, mode) = self.column_location(column);
        let mut v = vec![0.0; self.fine_dim()];
        v[edge * self.n..(edge + 1) * self.n].copy_from_slice(&self.modes[edge][mode]);
        v
    }

    /// `R c`
    pub fn prolong(&self, coarse: &[f64]) -> Result<Vec<f64>> {
        if coarse.len() != self.coarse_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.coarse_dim(),
                found: coarse.len(),
            });
        }
        let mut fine = vec![0.0; self.fine_dim()];
        for (e, modes) in self.modes.iter().enumerate() {
            let out = &mut fine[e * self.n..(e + 1) * self.n];
            for (m, phi) in modes.iter().enumerate() {
                let c = coarse[self.offsets[e] + m];
                out.iter_mut().zip(phi).for_each(|(o, p)| *o += c * p);
            }
        }
        Ok(fine)
    }

    /// `R^T v`
    pub fn restrict(&self, fine: &[f64]) -> Result<Vec<f64>> {
        if fine.len() != self.fine_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.fine_dim(),
                found: fine.len(),
            });
        }
        let mut coarse = Vec::with_capacity(self.coarse_dim());
        for (e, modes) in self.modes.iter().enumerate() {
            let seg = &fine[e * self.n..(e + 1) * self.n];
            for phi in modes {
                coarse.push(phi.iter().zip(seg).map(|(a, b)| a * b).sum());
            }
        }
        Ok(coarse)
    }

    /// Basis keeping the first `nb` modes of every edge.
    pub fn truncated(&self, nb: usize) -> Result<Self> {
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(e, m)| {
                if m.len() < nb {
                    Err(Error::InsufficientModes {
                        edge: e,
                        needed: nb,
                        available: m.len(),
                    })
                } else {
                    Ok(m[..nb].to_vec())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = vec![0];
        for m in &modes {
            offsets.push(offsets.last().unwrap() + m.len());
        }
        Ok(Self {
            n: self.n,
            modes,
            offsets,
            dropped: self.dropped.clone(),
        })
    }
}

/// Constant mode followed by the first `nb - 1` candidates that survive
/// `L2(E)` Gram-Schmidt, on every edge.
pub fn build_mortar_basis(geom: &GridGeometry, candidates: &[Vec<Vec<f64>>], nb: usize) -> Result<MortarBasis> {
    let n = geom.fine_per_block();
    let h = geom.fine_size();
    if nb == 0 || nb > n {
        return Err(Error::InvalidArgument(format!("Nb must be in 1..={n}, got {nb}")));
    }
    if candidates.len() != geom.num_coarse_edges() {
        return Err(Error::DimensionMismatch {
            expected: geom.num_coarse_edges(),
            found: candidates.len(),
        });
    }
    let mut modes = Vec::with_capacity(candidates.len());
    let mut dropped = Vec::new();
    for (edge, cands) in candidates.iter().enumerate() {
        if let Some(bad) = cands.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let (m, d) = orthonormalize(n, h, cands, nb);
        if m.len() < nb {
            return Err(Error::InsufficientModes {
                edge,
                needed: nb,
                available: m.len(),
            });
        }
        dropped.extend(d.into_iter().map(|i| (edge, i)));
        modes.push(m);
    }
    let mut basis = MortarBasis::from_edge_modes(geom, modes)?;
    basis.dropped = dropped;
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{realize_field, FieldPreset};

    fn gram(modes: &[Vec<f64>], h: f64) -> DMatrix<f64> {
        DMatrix::from_fn(modes.len(), modes.len(), |i, j| l2_dot(&modes[i], &modes[j], h))
    }

    #[test]
    fn constants_are_harmonic() {
        let g = GridGeometry::new(3, 4).unwrap();
        let k = PermeabilityField::uniform(&g, 1.0).unwrap();
        for edge in [0, 7] {
            let s = SnapshotSolver::new(&g, &k, edge, g.neighborhood(edge)).unwrap();
            let t = s.trace(&vec![1.0; s.num_boundary_edges()]);
            assert!(t.iter().all(|v| (v - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn mode_index_is_checked() {
        let g = GridGeometry::new(2, 3).unwrap();
        let k = PermeabilityField::uniform(&g, 1.0).unwrap();
        let r = harmonic_snapshot(&g, &k, 0, g.neighborhood(0), 18);
        assert!(matches!(r, Err(Error::ModeOutOfRange { index: 18, count: 18 })));
        assert!(harmonic_snapshot(&g, &k, 0, g.neighborhood(0), 17).is_ok());
    }

    #[test]
    fn full_snapshot_counts() {
        let g = GridGeometry::new(5, 6).unwrap();
        let k = realize_field(&FieldPreset::Inclusions.spec(1e4), &g).unwrap();
        let interior_edge = 6; // horizontal edge between block rows 1 and 2
        let s1 = snapshot_space(&g, &k, interior_edge, SnapshotCase::Case1, 0).unwrap();
        assert_eq!(s1.traces.ncols(), 6 * 6);
        assert_eq!(s1.traces.nrows(), 6);
        let s4 = snapshot_space(&g, &k, interior_edge, SnapshotCase::Case4, 3).unwrap();
        assert_eq!(s4.traces.ncols(), 8);
        assert_eq!(s4.provenance, Provenance::Randomized { count: 8, seed: 3 });
    }

    #[test]
    fn randomized_snapshots_are_seeded() {
        let g = GridGeometry::new(3, 4).unwrap();
        let k = realize_field(&FieldPreset::Channels.spec(1e4), &g).unwrap();
        let a = snapshot_space(&g, &k, 2, SnapshotCase::Case4, 42).unwrap();
        let b = snapshot_space(&g, &k, 2, SnapshotCase::Case4, 42).unwrap();
        let c = snapshot_space(&g, &k, 2, SnapshotCase::Case4, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.traces, c.traces);
    }

    #[test]
    fn rank_one_pod() {
        let v = [0.3, -1.0, 2.0, 0.5];
        let traces = DMatrix::from_fn(4, 2, |r, c| v[r] * (c + 1) as f64);
        let h = 0.25;
        let snap = SnapshotSet {
            edge: 0,
            traces,
            provenance: Provenance::Full,
            domain: OversampleSpec::new(4, 0, 0, 4),
            flagged: vec![],
        };
        let all = pod_all(&snap.traces, h);
        assert_eq!(all.rank(), 1);
        let norm = l2_dot(&v, &v, h).sqrt();
        for (m, x) in all.modes[0].iter().zip(&v) {
            assert!((m - x / norm).abs() < 1e-12);
        }
        assert!(all.eigenvalues[1].abs() < 1e-12 * all.eigenvalues[0]);
        assert!(pod_reduce(&snap, 1, h).is_ok());
        assert!(matches!(pod_reduce(&snap, 2, h), Err(Error::RankDeficient { requested: 2, rank: 1 })));
    }

    #[test]
    fn legendre_modes() {
        let g = GridGeometry::new(2, 8).unwrap();
        let h = g.fine_size();
        let one = polynomial_basis(&g, 0, 1).unwrap();
        assert_eq!(one, vec![constant_mode(8, h)]);
        let two = polynomial_basis(&g, 1, 2).unwrap();
        for k in 0..8 {
            assert!((two[1][k] + two[1][7 - k]).abs() < 1e-12);
        }
        let all = polynomial_basis(&g, 2, 8).unwrap();
        let gm = gram(&all, h);
        assert!((gm - DMatrix::identity(8, 8)).amax() < 1e-12);
        assert!(polynomial_basis(&g, 0, 9).is_err());
    }

    #[test]
    fn legendre_averages_integrate_exactly() {
        // P2 = (3 s^2 - 1) / 2 averages to zero over [-1, 1]
        let avg = legendre_averages(2, 4);
        assert!(avg.iter().sum::<f64>().abs() < 1e-14);
        // first quarter [-1, -0.5]
        let direct = 2.0 * (((-0.5f64).powi(3) - (-0.5)) / 2.0 - ((-1.0f64).powi(3) - (-1.0)) / 2.0);
        assert!((avg[0] - direct).abs() < 1e-14);
    }

    #[test]
    fn mortar_basis_is_orthonormal_with_constant_first() {
        let g = GridGeometry::new(3, 6).unwrap();
        let k = realize_field(&FieldPreset::Inclusions.spec(1e4), &g).unwrap();
        for kind in BasisKind::ALL {
            let cands = basis_candidates(&g, &k, kind, 9).unwrap();
            let basis = build_mortar_basis(&g, &cands, 4).unwrap();
            assert_eq!(basis.coarse_dim(), 4 * g.num_coarse_edges());
            for e in 0..g.num_coarse_edges() {
                assert_eq!(basis.modes(e)[0], constant_mode(6, g.fine_size()));
                let gm = gram(basis.modes(e), g.fine_size());
                assert!((gm - DMatrix::identity(4, 4)).amax() < 1e-12, "{}", kind.name());
            }
        }
    }

    #[test]
    fn dependent_candidates_are_dropped_and_replaced() {
        let g = GridGeometry::new(2, 4).unwrap();
        let c = vec![
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 4.0, 6.0, 8.0],
            vec![1.0, 0.0, 0.0, 1.0],
        ];
        let basis = build_mortar_basis(&g, &vec![c.clone(); 4], 3).unwrap();
        assert!(basis.dropped().contains(&(0, 0)));
        assert!(basis.dropped().contains(&(0, 2)));
        assert_eq!(basis.modes(0).len(), 3);
        let short = vec![c[..2].to_vec(); 4];
        assert!(matches!(
            build_mortar_basis(&g, &short, 3),
            Err(Error::InsufficientModes { needed: 3, available: 2, .. })
        ));
    }

    #[test]
    fn prolong_and_restrict_are_adjoint() {
        let g = GridGeometry::new(3, 4).unwrap();
        let cands = basis_candidates(&g, &PermeabilityField::uniform(&g, 1.0).unwrap(), BasisKind::Polynomial, 0).unwrap();
        let basis = build_mortar_basis(&g, &cands, 3).unwrap();
        let c: Vec<f64> = (0..basis.coarse_dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let f: Vec<f64> = (0..basis.fine_dim()).map(|i| (i as f64 * 0.11).cos()).collect();
        let lhs: f64 = basis.prolong(&c).unwrap().iter().zip(&f).map(|(a, b)| a * b).sum();
        let rhs: f64 = basis.restrict(&f).unwrap().iter().zip(&c).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        for col in [0, 5, basis.coarse_dim() - 1] {
            let (e, m) = basis.column_location(col);
            assert_eq!(basis.column_index(e, m), col);
        }
        assert!(basis.prolong(&c[1..]).is_err());
        assert_eq!(basis.truncated(2).unwrap().coarse_dim(), 2 * g.num_coarse_edges());
    }
}
